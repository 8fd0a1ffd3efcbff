#pragma once

#include <cstdint>
#include <vector>

#include "neuronalg/raster.hpp"

namespace nalg {

enum class Connectivity { Four = 4, Eight = 8 };

/// Connected components of the non-zero pixels, ids 1..K in row-major order
/// of each component's first pixel.
LabelMap label_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight);

// Relabels so that every label is a single 8-connected component and ids
// are contiguous 1..K in row-major order of first appearance. Pixel
// foreground/background membership is never changed.
LabelMap normalize_labels(const LabelMap& labels);

/// Pixel counts indexed by label (index 0 counts background).
std::vector<std::int64_t> label_areas(const LabelMap& labels);

BinaryMask region_mask(const LabelMap& labels, std::int32_t label);
BinaryMask foreground_of(const LabelMap& labels);

// Exact Euclidean distance from each foreground pixel centre to the nearest
// background pixel centre; pixels beyond the image border count as
// background, so a lone foreground pixel has distance 1. Background is 0.
Raster<double> distance_transform(const BinaryMask& mask);

// Fills background regions not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& mask);

BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask erode(const BinaryMask& mask, int radius);

}  // namespace nalg
