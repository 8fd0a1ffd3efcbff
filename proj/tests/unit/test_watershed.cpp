#include <doctest.h>

#include <cmath>

#include "neuronalg/morphology.hpp"
#include "neuronalg/watershed.hpp"
#include "support/oracles.hpp"

using namespace nalg;
using nalg::testing::Rng;

namespace {

// Regional maxima of a distance map found by direct neighbour comparison,
// then filtered by the suppression ratio.
std::vector<Point> brute_peaks(const Raster<double>& d, double ratio) {
  double gmax = 0.0;
  for (double v : d.storage()) gmax = std::max(gmax, v);
  std::vector<Point> peaks;
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (d(x, y) < ratio * gmax || d(x, y) == 0.0) continue;
      bool top = true;
      for (int dy = -1; dy <= 1 && top; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (d.contains(x + dx, y + dy) && d(x + dx, y + dy) > d(x, y)) top = false;
        }
      }
      if (top) peaks.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return peaks;
}

BinaryMask union_mask(const BinaryMask& a, const BinaryMask& b) {
  BinaryMask u = a;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = a[i] || b[i];
  return u;
}

}  // namespace

TEST_CASE("gradient magnitude") {
  for (double v : gradient_magnitude(GrayImage(6, 6, 0.4)).storage()) CHECK(v == 0.0);

  GrayImage step(8, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 4; x < 8; ++x) step(x, y) = 1.0;
  }
  const GradientImage gs = gradient_magnitude(step);
  for (int y = 0; y < 5; ++y) {
    CHECK(gs(3, y) == doctest::Approx(4.0));
    CHECK(gs(4, y) == doctest::Approx(4.0));
    CHECK(gs(0, y) == 0.0);
    CHECK(gs(7, y) == 0.0);
  }

  // Unit-slope ramp of 1/4 per pixel: gx = (1+2+1) * 2 * 0.25 = 2.
  GrayImage ramp(5, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) ramp(x, y) = x / 4.0;
  }
  const GradientImage gr = gradient_magnitude(ramp);
  for (int y = 1; y < 4; ++y) {
    for (int x = 1; x < 4; ++x) CHECK(gr(x, y) == doctest::Approx(2.0));
  }
}

TEST_CASE("extract_markers examples") {
  const GrayImage blank(80, 60);
  const BinaryMask one = testing::disk_mask(80, 60, 40, 30, 15);
  const LabelMap m1 = extract_markers(blank, one);
  CHECK(m1.max_label() == 1);
  CHECK(m1(40, 30) == 1);

  const BinaryMask two = union_mask(testing::disk_mask(80, 60, 20, 30, 12),
                                    testing::disk_mask(80, 60, 60, 30, 12));
  CHECK(extract_markers(blank, two).max_label() == 2);

  // Centres 1.5 radii apart.
  const double r = 14;
  const BinaryMask ov = union_mask(testing::disk_mask(80, 60, 29, 30, r),
                                   testing::disk_mask(80, 60, 29 + 1.5 * r, 30, r));
  const LabelMap m3 = extract_markers(blank, ov);
  REQUIRE(m3.max_label() == 2);
  const auto peaks = brute_peaks(testing::brute_distance(ov), 0.3);
  for (std::int32_t l = 1; l <= 2; ++l) {
    const Point c = centroid(region_mask(m3, l));
    double best = 1e9;
    for (const Point& p : peaks) best = std::min(best, std::hypot(p.x - c.x, p.y - c.y));
    CHECK(best <= 2.0);
    const double near_a = std::hypot(c.x - 29, c.y - 30);
    const double near_b = std::hypot(c.x - (29 + 1.5 * r), c.y - 30);
    CHECK(std::min(near_a, near_b) <= 3.0);
  }

  try {
    extract_markers(blank, BinaryMask(80, 60));
    FAIL("expected EmptyForeground");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyForeground);
  }
}

TEST_CASE("meyer_flood examples") {
  Rng rng(1);
  GradientImage g(6, 4);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform();
  LabelMap single(6, 4);
  single(2, 1) = 1;
  for (auto v : meyer_flood(g, single).storage()) CHECK(v == 1);

  GradientImage well(5, 1, std::vector<double>{0, 0, 5, 0, 0});
  LabelMap ends(5, 1, std::vector<std::int32_t>{1, 0, 0, 0, 2});
  const LabelMap split = meyer_flood(well, ends);
  CHECK(split(0, 0) == 1);
  CHECK(split(1, 0) == 1);
  CHECK(split(3, 0) == 2);
  CHECK(split(4, 0) == 2);
  CHECK((split(2, 0) == 1 || split(2, 0) == 2));

  LabelMap full(3, 2, std::vector<std::int32_t>{1, 1, 2, 3, 3, 2});
  CHECK(meyer_flood(GradientImage(3, 2), full) == full);

  try {
    meyer_flood(g, LabelMap(6, 4));
    FAIL("expected EmptyMarkers");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMarkers);
  }
}

TEST_CASE("meyer_flood respects the domain") {
  GradientImage g(6, 1);
  LabelMap m(6, 1);
  m(0, 0) = 1;
  BinaryMask dom(6, 1, std::vector<std::uint8_t>{1, 1, 1, 0, 1, 1});
  const LabelMap out = meyer_flood(g, m, dom);
  CHECK(out == LabelMap(6, 1, std::vector<std::int32_t>{1, 1, 1, 0, 0, 0}));
}

TEST_CASE("meyer_flood refines markers into connected basins") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = rng.integer(2, 64);
    const int h = rng.integer(2, 64);
    GradientImage g(w, h);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::floor(rng.uniform() * 6.0);
    LabelMap markers = label_components(testing::random_mask(rng, w, h, 0.01));
    if (markers.max_label() == 0) markers(0, 0) = 1;
    const LabelMap out = meyer_flood(g, markers);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (markers[i]) REQUIRE(out[i] == markers[i]);
      REQUIRE(out[i] > 0);
    }
    CHECK(out.max_label() <= markers.max_label());
    CHECK(testing::all_labels_connected(out));
  }
}
