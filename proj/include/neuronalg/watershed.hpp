#pragma once

#include <optional>

#include "neuronalg/raster.hpp"

namespace nalg {

/// Sobel magnitude with clamp-to-edge borders (unnormalized kernels).
GradientImage gradient_magnitude(const GrayImage& img);

struct MarkerOptions {
  /// Maxima whose distance is below ratio * global maximum are dropped.
  double suppression_ratio = 0.3;
  /// Dynamic below which neighbouring maxima are fused (h-maxima), pixels.
  double h = 1.0;
};

// Markers from a distance-like elevation map restricted to `domain`:
// 8-connected regional h-maxima of `elevation`, suppressed below
// ratio * max. Domain components left without a marker receive one at
// their highest pixel. Labels are compact 1..K in row-major order.
LabelMap markers_from_elevation(const Raster<double>& elevation, const BinaryMask& domain,
                                const MarkerOptions& opt = {});

// Markers for the rough watershed: maxima of the L2 distance transform of
// `foreground`. `smoothed` only fixes the expected dimensions.
LabelMap extract_markers(const GrayImage& smoothed, const BinaryMask& foreground,
                         const MarkerOptions& opt = {});

// Priority-flood watershed from markers (4-connected, lowest gradient
// first, FIFO among equal priorities). When `domain` is given, pixels
// outside it are never labeled. Pixels whose labeled neighbours disagree
// become ridge pixels and are then assigned to the adjacent basin whose
// neighbouring pixel has the lowest gradient.
LabelMap meyer_flood(const GradientImage& grad, const LabelMap& markers,
                     const std::optional<BinaryMask>& domain = std::nullopt);

}  // namespace nalg
