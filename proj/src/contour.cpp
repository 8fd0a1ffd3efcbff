#include "neuronalg/contour.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

namespace nalg {

Point RadialContour::point(int b) const {
  const double t = bin_angle(b);
  return {center.x + radii[static_cast<std::size_t>(b)] * std::cos(t),
          center.y + radii[static_cast<std::size_t>(b)] * std::sin(t)};
}

Point centroid(const BinaryMask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) fail(ErrorCode::EmptyRegion, "centroid of an empty region");
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

RadialContour radial_contour(const BinaryMask& mask, Point center) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::array<double, kRadialBins> sum{};
  std::array<int, kRadialBins> count{};

  auto is_bg = [&](int x, int y) { return !mask.contains(x, y) || mask(x, y) == 0; };
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      if (!(is_bg(x, y - 1) || is_bg(x - 1, y) || is_bg(x + 1, y) || is_bg(x, y + 1))) continue;
      const double dx = x - center.x;
      const double dy = y - center.y;
      double a = std::atan2(dy, dx);
      if (a < 0.0) a += kTwoPi;
      int b = static_cast<int>(a / kTwoPi * kRadialBins);
      b = std::clamp(b, 0, kRadialBins - 1);
      sum[static_cast<std::size_t>(b)] += std::hypot(dx, dy);
      ++count[static_cast<std::size_t>(b)];
    }
  }

  std::vector<int> filled;
  for (int b = 0; b < kRadialBins; ++b) {
    if (count[static_cast<std::size_t>(b)] > 0) filled.push_back(b);
  }
  if (filled.empty()) fail(ErrorCode::EmptyRegion, "no boundary pixels in region");

  RadialContour c;
  c.center = center;
  for (int b : filled) {
    c.radii[static_cast<std::size_t>(b)] =
        sum[static_cast<std::size_t>(b)] / count[static_cast<std::size_t>(b)];
  }
  // Circular linear interpolation across gaps between occupied bins.
  const std::size_t nf = filled.size();
  for (std::size_t i = 0; i < nf; ++i) {
    const int a = filled[i];
    const int b = filled[(i + 1) % nf];
    const int gap = (b - a + kRadialBins) % kRadialBins;
    const int span = gap == 0 ? kRadialBins : gap;
    const double ra = c.radii[static_cast<std::size_t>(a)];
    const double rb = c.radii[static_cast<std::size_t>(b)];
    for (int s = 1; s < span; ++s) {
      const double t = static_cast<double>(s) / span;
      c.radii[static_cast<std::size_t>((a + s) % kRadialBins)] = ra + t * (rb - ra);
    }
  }
  return c;
}

BinaryMask contour_to_mask(const RadialContour& c, int width, int height) {
  BinaryMask out(width, height);
  std::array<Point, kRadialBins> v;
  for (int b = 0; b < kRadialBins; ++b) {
    Point p = c.point(b);
    p.x = std::clamp(p.x, 0.0, static_cast<double>(width - 1));
    p.y = std::clamp(p.y, 0.0, static_cast<double>(height - 1));
    v[static_cast<std::size_t>(b)] = p;
  }

  double ymin = v[0].y;
  double ymax = v[0].y;
  for (const Point& p : v) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::vector<double> xs;
  const int y_end = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
  for (int y = std::max(0, static_cast<int>(std::floor(ymin))); y <= y_end; ++y) {
    const double py = y;
    xs.clear();
    for (int i = 0; i < kRadialBins; ++i) {
      const Point& a = v[static_cast<std::size_t>(i)];
      const Point& b = v[static_cast<std::size_t>((i + 1) % kRadialBins)];
      // Half-open rule so shared vertices are counted once.
      if ((a.y <= py && b.y > py) || (b.y <= py && a.y > py)) {
        xs.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int x1 = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1])));
      for (int x = x0; x <= x1; ++x) out(x, y) = 1;
    }
  }
  const int cx = static_cast<int>(std::lround(c.center.x));
  const int cy = static_cast<int>(std::lround(c.center.y));
  if (out.contains(cx, cy)) out(cx, cy) = 1;
  return out;
}

void write_contour_csv(std::ostream& os, std::int32_t label, const RadialContour& c) {
  for (int b = 0; b < kRadialBins; ++b) {
    os << label << ',' << b << ',' << c.angle(b) << ',' << c.radii[static_cast<std::size_t>(b)]
       << '\n';
  }
}

}  // namespace nalg
