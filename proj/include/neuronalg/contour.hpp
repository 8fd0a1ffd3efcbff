#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <numbers>

#include "neuronalg/raster.hpp"

namespace nalg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr int kRadialBins = 30;

/// Fixed angle grid: theta_b = 2*pi*(b + 0.5)/30.
constexpr double bin_angle(int b) {
  return 2.0 * std::numbers::pi * (b + 0.5) / kRadialBins;
}

struct RadialContour {
  Point center;
  std::array<double, kRadialBins> radii{};

  double angle(int b) const { return bin_angle(b); }
  Point point(int b) const;
};

/// Arithmetic mean of the foreground pixel coordinates; EmptyRegion if none.
Point centroid(const BinaryMask& mask);

// Boundary pixels (foreground with a 4-neighbour in background or outside
// the image) are binned by angle around `center`; bin b covers
// [b, b+1) * 2*pi/30. Each bin's radius is the mean boundary distance;
// empty bins are interpolated circularly from the nearest occupied bins.
RadialContour radial_contour(const BinaryMask& mask, Point center);

// Even-odd scanline fill of the closed 30-gon, vertices clamped to the
// image. The pixel under the centre is always set.
BinaryMask contour_to_mask(const RadialContour& c, int width, int height);

/// CSV rows: label,bin,angle,radius (no header).
void write_contour_csv(std::ostream& os, std::int32_t label, const RadialContour& c);

}  // namespace nalg
