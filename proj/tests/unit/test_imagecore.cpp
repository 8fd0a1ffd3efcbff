#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "neuronalg/image_io.hpp"
#include "neuronalg/imagecore.hpp"
#include "support/oracles.hpp"

using namespace nalg;
using nalg::testing::Rng;

namespace {

GrayImage random_gray(Rng& rng, int w, int h) {
  GrayImage g(w, h);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform();
  return g;
}

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an nalg::Error");
  return ErrorCode::InvalidParameter;
}

}  // namespace

TEST_CASE("extract_intensity channel selection") {
  RgbImage px(1, 1);
  px(0, 0) = {0.0, 0.0, 1.0};
  CHECK(extract_intensity(px, ChannelPolicy::Blue)(0, 0) == 1.0);
  CHECK(extract_intensity(px, ChannelPolicy::Red)(0, 0) == 0.0);

  RgbImage two(2, 1);
  two(0, 0) = {0.2, 0.4, 0.6};
  two(1, 0) = {1.0, 1.0, 1.0};
  const GrayImage lum = extract_intensity(two, ChannelPolicy::Luminance);
  CHECK(lum(0, 0) == doctest::Approx(0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.6).epsilon(1e-12));
  CHECK(lum(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

  GrayImage g(3, 2, 0.25);
  CHECK(extract_intensity(g, ChannelPolicy::AlreadyGray) == g);
  CHECK(code_of([&] { extract_intensity(g, ChannelPolicy::Blue); }) == ErrorCode::InvalidPolicy);
  CHECK(code_of([&] { extract_intensity(two, ChannelPolicy::AlreadyGray); }) ==
        ErrorCode::InvalidPolicy);
}

TEST_CASE("scale factor") {
  const ScaleFactor s = ScaleFactor::for_size(1200, 1000);
  CHECK(s.sf == doctest::Approx(2200.0 / 2220.0));
  CHECK(s.sd == 10);
  CHECK(ScaleFactor::for_size(10, 10).sd == 2);
  // 10 sf = 9 exactly: equidistant from 8 and 10, ties go up.
  CHECK(ScaleFactor::for_size(999, 999).sd == 10);
  // 10 sf is about 6.3.
  CHECK(ScaleFactor::for_size(700, 700).sd == 6);
}

TEST_CASE("equalize examples") {
  GrayImage c(4, 4, 0.4);
  const GrayImage ec = equalize(c);
  for (double v : ec.storage()) CHECK(v == ec[0]);

  GrayImage four(4, 1, std::vector<double>{0.1, 0.1, 0.9, 0.9});
  const GrayImage e = equalize(four);
  CHECK(e[0] == e[1]);
  CHECK(e[2] == e[3]);
  CHECK(e[0] < e[2]);

  // Every level used once: already uniform.
  GrayImage ramp(256, 1);
  for (int l = 0; l < 256; ++l) ramp(l, 0) = l / 255.0;
  const GrayImage er = equalize(ramp);
  for (int l = 0; l < 256; ++l) CHECK(quantize(er(l, 0)) == l);
}

TEST_CASE("equalize is monotone and idempotent at 8-bit precision") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = rng.integer(1, 40);
    const int h = rng.integer(1, 40);
    GrayImage g = random_gray(rng, w, h);
    if (trial % 3 == 0) {
      for (double& v : g.storage()) v = std::round(v * 8.0) / 8.0;
    }
    const GrayImage e1 = equalize(g);
    const GrayImage e2 = equalize(e1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(quantize(e1[i]) == quantize(e2[i]));
      CHECK(e1[i] >= 0.0);
      CHECK(e1[i] <= 1.0);
      for (std::size_t j = 0; j < g.size(); j += 7) {
        if (quantize(g[i]) < quantize(g[j])) CHECK(e1[i] <= e1[j]);
      }
    }
  }
}

TEST_CASE("gaussian smoothing") {
  Rng rng(3);
  const GrayImage g = random_gray(rng, 9, 5);
  CHECK(gaussian_smooth(g, 0.0) == g);

  const GrayImage c(6, 4, 0.37);
  for (double v : gaussian_smooth(c, 2.5).storage()) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));

  GrayImage impulse(7, 7);
  impulse(3, 3) = 1.0;
  const GrayImage got = gaussian_smooth(impulse, 1.0);
  const GrayImage want = testing::dense_gaussian(impulse, 1.0);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

  CHECK(code_of([&] { gaussian_smooth(g, -1.0); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("gaussian matches dense convolution and commutes with inversion") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const GrayImage g = random_gray(rng, rng.integer(1, 16), rng.integer(1, 16));
    const double sigma = rng.uniform(0.3, 3.0);
    const GrayImage a = gaussian_smooth(g, sigma);
    const GrayImage b = testing::dense_gaussian(g, sigma);
    const GrayImage inv = gaussian_smooth(invert(g), sigma);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
      CHECK(inv[i] == doctest::Approx(1.0 - a[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("psnr") {
  const GrayImage a(4, 4, 0.3);
  CHECK(psnr(a, a) == 100.0);
  CHECK(psnr(GrayImage(3, 3, 0.0), GrayImage(3, 3, 1.0)) == doctest::Approx(0.0));
  const GrayImage p(2, 1, std::vector<double>{0.0, 0.0});
  const GrayImage q(2, 1, std::vector<double>{0.1, 0.0});
  CHECK(psnr(p, q) == doctest::Approx(10.0 * std::log10(1.0 / 0.005)).epsilon(1e-12));
  CHECK(psnr(p, q) == psnr(q, p));
  CHECK(code_of([&] { psnr(p, a); }) == ErrorCode::ShapeError);

  // Strictly decreasing in MSE.
  const GrayImage r(2, 1, std::vector<double>{0.2, 0.0});
  CHECK(psnr(p, r) < psnr(p, q));
}

TEST_CASE("noise calibrated to a target psnr") {
  const GrayImage mid(256, 256, 0.5);
  CHECK(add_noise_to_psnr(mid, 100.0, 9) == mid);
  const GrayImage n1 = add_noise_to_psnr(mid, 30.0, 7);
  CHECK(psnr(mid, n1) >= 29.9);
  CHECK(psnr(mid, n1) <= 30.1);
  CHECK(add_noise_to_psnr(mid, 30.0, 7) == n1);
  CHECK_FALSE(add_noise_to_psnr(mid, 30.0, 8) == n1);
  for (double v : n1.storage()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (double db : {40.1, 26.9, 15.7}) {
    const GrayImage n = add_noise_to_psnr(mid, db, 1);
    CHECK(std::abs(psnr(mid, n) - db) <= 0.1);
  }
  CHECK(code_of([&] { add_noise_to_psnr(mid, 0.0, 1); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { add_noise_to_psnr(mid, 120.0, 1); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("png round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "nalg_io_test";
  std::filesystem::create_directories(dir);

  GrayImage g(5, 3);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i * 17 % 256) / 255.0;
  io::write_gray_png(dir / "g.png", g);
  const AnyImage back = io::load_image(dir / "g.png");
  REQUIRE(std::holds_alternative<GrayImage>(back));
  const GrayImage& gb = std::get<GrayImage>(back);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(quantize(gb[i]) == quantize(g[i]));

  LabelMap lm(4, 2);
  lm(0, 0) = 1;
  lm(3, 1) = 300;
  lm(2, 0) = 65535;
  io::write_label_png(dir / "l.png", lm);
  CHECK(io::load_label_image(dir / "l.png") == lm);

  std::ofstream(dir / "bad.png") << "not an image";
  CHECK(code_of([&] { io::load_image(dir / "bad.png"); }) == ErrorCode::DecodeError);
  CHECK(code_of([&] { io::load_image(dir / "missing.png"); }) == ErrorCode::IoError);
  std::filesystem::remove_all(dir);
}
