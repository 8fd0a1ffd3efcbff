#include "neuronalg/threshold.hpp"

#include "neuronalg/imagecore.hpp"

namespace nalg {

int Histogram256::occupied_bins() const noexcept {
  int n = 0;
  for (auto c : counts) n += c != 0;
  return n;
}

Histogram256 histogram(const GrayImage& img) {
  Histogram256 h;
  for (double v : img.storage()) h.add(quantize(v));
  return h;
}

Histogram256 histogram(const GrayImage& img, const BinaryMask& region) {
  require_same_shape(img, region, "histogram");
  Histogram256 h;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (region[i]) h.add(quantize(img[i]));
  }
  return h;
}

namespace {

using u128 = unsigned __int128;

// a * b as a 192-bit value (hi:lo), for exact ratio comparison.
struct Wide {
  u128 hi = 0;
  u128 lo = 0;
};

Wide mul(u128 a, std::uint64_t b) {
  const u128 mask64 = (u128{1} << 64) - 1;
  const u128 a_lo = a & mask64;
  const u128 a_hi = a >> 64;
  const u128 p_lo = a_lo * b;
  const u128 p_hi = a_hi * b + (p_lo >> 64);
  Wide w;
  w.lo = (p_lo & mask64) | ((p_hi & mask64) << 64);
  w.hi = p_hi >> 64;
  return w;
}

bool less(const Wide& a, const Wide& b) {
  return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo;
}

}  // namespace

int otsu_level(const Histogram256& hist) {
  if (hist.occupied_bins() < 2) {
    fail(ErrorCode::DegenerateHistogram, "fewer than two occupied histogram bins");
  }
  // Between-class variance at t is proportional to
  //   (N*S0 - S*W0)^2 / (W0 * W1)
  // with W0/S0 the count/level-sum of class {<= t}.
  const std::uint64_t n = hist.total;
  std::uint64_t s = 0;
  for (int l = 0; l < 256; ++l) s += hist.counts[l] * static_cast<std::uint64_t>(l);

  std::uint64_t w0 = 0;
  std::uint64_t s0 = 0;
  int best = -1;
  u128 best_num = 0;
  std::uint64_t best_den = 1;
  for (int t = 0; t < 256; ++t) {
    w0 += hist.counts[t];
    s0 += hist.counts[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t w1 = n - w0;
    if (w0 == 0 || w1 == 0) continue;
    const u128 a = static_cast<u128>(n) * s0;
    const u128 b = static_cast<u128>(s) * w0;
    const u128 d = a > b ? a - b : b - a;
    const u128 num = d * d;
    const std::uint64_t den = w0 * w1;
    // num/den > best_num/best_den  <=>  num*best_den > best_num*den
    if (best < 0 || less(mul(best_num, den), mul(num, best_den))) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

BinaryMask binarize(const GrayImage& img, int level) {
  BinaryMask m(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) m[i] = quantize(img[i]) > level ? 1 : 0;
  return m;
}

}  // namespace nalg
