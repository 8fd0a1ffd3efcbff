#pragma once

#include <array>
#include <cstdint>

#include "neuronalg/raster.hpp"

namespace nalg {

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;

  void add(int level, std::uint64_t n = 1) {
    counts[static_cast<std::size_t>(level)] += n;
    total += n;
  }
  int occupied_bins() const noexcept;
};

Histogram256 histogram(const GrayImage& img);
/// Histogram restricted to pixels where `region` is non-zero.
Histogram256 histogram(const GrayImage& img, const BinaryMask& region);

// Level t in 0..255 maximizing the between-class variance of the split
// {<= t} / {> t}; the smallest maximizer wins. Comparisons are exact
// (integer arithmetic), so ties are genuine ties on every platform.
// Throws DegenerateHistogram when fewer than two bins are occupied.
int otsu_level(const Histogram256& hist);

/// Foreground iff quantize(v) > level.
BinaryMask binarize(const GrayImage& img, int level);

}  // namespace nalg
