#pragma once

#include <cstdint>
#include <variant>

#include "neuronalg/raster.hpp"

namespace nalg {

enum class ChannelPolicy { Luminance, Red, Green, Blue, AlreadyGray };

using AnyImage = std::variant<GrayImage, RgbImage>;

/// Scale-relative sizes derived from the image dimensions.
struct ScaleFactor {
  double sf = 1.0;  // (height + width) / 2220
  int sd = 2;       // nearest even integer to 10*sf, ties upward, at least 2

  static ScaleFactor for_size(int width, int height);
};

GrayImage extract_intensity(const RgbImage& img, ChannelPolicy policy);
GrayImage extract_intensity(const GrayImage& img, ChannelPolicy policy);
GrayImage extract_intensity(const AnyImage& img, ChannelPolicy policy);

/// 256-level quantization used by every histogram in the library.
inline int quantize(double v) noexcept {
  const double q = v * 255.0 + 0.5;
  return q <= 0.0 ? 0 : (q >= 255.0 ? 255 : static_cast<int>(q));
}

// Global histogram equalization over 256 levels. Output values sit on the
// 256-level grid; a single occupied level maps to itself.
GrayImage equalize(const GrayImage& img);

GrayImage invert(const GrayImage& img);

// Separable Gaussian with clamp-to-edge padding, kernel radius ceil(3 sigma).
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

inline constexpr double kPsnrCap = 100.0;

/// Peak 1.0; identical images (or anything above the cap) report kPsnrCap.
double psnr(const GrayImage& reference, const GrayImage& test);

// Zero-mean Gaussian noise whose amplitude is calibrated until
// |psnr(img, out) - target_db| <= 0.1. Output is a pure function of
// (img, target_db, seed).
GrayImage add_noise_to_psnr(const GrayImage& img, double target_db, std::uint64_t seed);

}  // namespace nalg
