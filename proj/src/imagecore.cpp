#include "neuronalg/imagecore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace nalg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::CalibrationError: return "CalibrationError";
    case ErrorCode::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::EmptyMarkers: return "EmptyMarkers";
    case ErrorCode::EmptyLabelMap: return "EmptyLabelMap";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::DatasetFormatError: return "DatasetFormatError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ScaleFactor ScaleFactor::for_size(int width, int height) {
  ScaleFactor s;
  s.sf = (static_cast<double>(height) + width) / 2220.0;
  const double half = 10.0 * s.sf / 2.0;
  s.sd = std::max(2, 2 * static_cast<int>(std::floor(half + 0.5)));
  return s;
}

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

GrayImage extract_intensity(const RgbImage& img, ChannelPolicy policy) {
  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const Rgb& p = img[i];
    switch (policy) {
      case ChannelPolicy::Luminance:
        out[i] = clamp01(0.299 * p.r + 0.587 * p.g + 0.114 * p.b);
        break;
      case ChannelPolicy::Red: out[i] = p.r; break;
      case ChannelPolicy::Green: out[i] = p.g; break;
      case ChannelPolicy::Blue: out[i] = p.b; break;
      case ChannelPolicy::AlreadyGray:
        fail(ErrorCode::InvalidPolicy, "AlreadyGray requires a grayscale input");
    }
  }
  return out;
}

GrayImage extract_intensity(const GrayImage& img, ChannelPolicy policy) {
  if (policy != ChannelPolicy::AlreadyGray) {
    fail(ErrorCode::InvalidPolicy, "channel selection requires an RGB input");
  }
  return img;
}

GrayImage extract_intensity(const AnyImage& img, ChannelPolicy policy) {
  return std::visit([policy](const auto& im) { return extract_intensity(im, policy); }, img);
}

GrayImage equalize(const GrayImage& img) {
  std::array<std::size_t, 256> hist{};
  for (double v : img.storage()) ++hist[quantize(v)];

  std::array<std::size_t, 256> cdf{};
  std::size_t acc = 0;
  std::size_t cdf_min = 0;
  int occupied = 0;
  for (int l = 0; l < 256; ++l) {
    acc += hist[l];
    cdf[l] = acc;
    if (hist[l] != 0) {
      if (occupied == 0) cdf_min = acc;
      ++occupied;
    }
  }
  const std::size_t total = img.size();

  std::array<double, 256> lut{};
  if (occupied <= 1) {
    for (int l = 0; l < 256; ++l) lut[l] = l / 255.0;
  } else {
    const double span = static_cast<double>(total - cdf_min);
    for (int l = 0; l < 256; ++l) {
      const double c = cdf[l] < cdf_min ? 0.0 : static_cast<double>(cdf[l] - cdf_min);
      lut[l] = std::round(255.0 * c / span) / 255.0;
    }
  }

  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = lut[quantize(img[i])];
  return out;
}

GrayImage invert(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = 1.0 - img[i];
  return out;
}

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    fail(ErrorCode::InvalidParameter, "gaussian sigma must be finite and >= 0");
  }
  if (sigma == 0.0) return img;

  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = img.width();
  const int h = img.height();
  GrayImage tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.clamped(x + i, y);
      tmp(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.clamped(x, y + i);
      out(x, y) = clamp01(acc);
    }
  }
  return out;
}

double psnr(const GrayImage& reference, const GrayImage& test) {
  require_same_shape(reference, test, "psnr");
  double sse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - test[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(reference.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

// Box-Muller over raw mt19937_64 output; std::normal_distribution is not
// reproducible across standard library implementations.
std::vector<double> standard_normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * kScale; };
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    z[i] = r * std::cos(t);
    if (i + 1 < n) z[i + 1] = r * std::sin(t);
  }
  return z;
}

double noisy_mse(const GrayImage& img, const std::vector<double>& z, double amp, GrayImage& out) {
  double sse = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[i] = clamp01(img[i] + amp * z[i]);
    const double d = out[i] - img[i];
    sse += d * d;
  }
  return sse / static_cast<double>(img.size());
}

}  // namespace

GrayImage add_noise_to_psnr(const GrayImage& img, double target_db, std::uint64_t seed) {
  if (!(target_db > 0.0) || target_db > kPsnrCap) {
    fail(ErrorCode::InvalidParameter, "target PSNR must lie in (0, 100]");
  }
  if (target_db == kPsnrCap) return img;

  constexpr int kMaxIterations = 50;
  constexpr double kTolerance = 0.1;
  constexpr double kAim = 0.01;

  const std::vector<double> z = standard_normals(img.size(), seed);
  const double target_mse = std::pow(10.0, -target_db / 10.0);

  // MSE is non-decreasing in the amplitude for a fixed draw, so a
  // safeguarded multiplicative update inside a shrinking bracket converges.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double amp = std::sqrt(target_mse);
  GrayImage out(img.width(), img.height());
  GrayImage best = img;
  double best_err = std::numeric_limits<double>::infinity();

  for (int it = 0; it < kMaxIterations; ++it) {
    const double mse = noisy_mse(img, z, amp, out);
    const double achieved = mse > 0.0 ? std::min(kPsnrCap, -10.0 * std::log10(mse)) : kPsnrCap;
    const double err = std::abs(achieved - target_db);
    if (err < best_err) {
      best_err = err;
      best = out;
    }
    if (err <= kAim) break;

    if (achieved > target_db) {
      lo = amp;
    } else {
      hi = amp;
    }
    double next = mse > 0.0 ? amp * std::sqrt(target_mse / mse) : amp * 2.0;
    if (!(next > lo && next < hi)) {
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : amp * 2.0;
    }
    amp = next;
  }
  if (best_err > kTolerance) {
    fail(ErrorCode::CalibrationError,
         "could not reach " + std::to_string(target_db) + " dB within 50 iterations");
  }
  return best;
}

}  // namespace nalg
