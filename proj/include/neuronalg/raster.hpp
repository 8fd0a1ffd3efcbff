#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "neuronalg/error.hpp"

namespace nalg {

// Row-major 2D buffer shared by every raster type in the library.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      fail(ErrorCode::InvalidParameter, "raster dimensions must be >= 1");
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) {
      fail(ErrorCode::InvalidParameter, "raster dimensions must be >= 1");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      fail(ErrorCode::ShapeError, "data length does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Clamp-to-edge read.
  const T& clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return data_[index(x, y)];
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::vector<T>& storage() & noexcept { return data_; }
  const std::vector<T>& storage() const& noexcept { return data_; }
  std::vector<T> storage() && noexcept { return std::move(data_); }

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::ShapeError, std::string(what) + ": dimension mismatch");
  }
}

/// Intensities in [0,1].
struct GrayImage : Raster<double> {
  using Raster::Raster;
};

struct Rgb {
  double r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbImage : Raster<Rgb> {
  using Raster::Raster;
};

/// 1 = foreground.
struct BinaryMask : Raster<std::uint8_t> {
  using Raster::Raster;
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto v : storage()) n += v != 0;
    return n;
  }
};

/// 0 = background, k >= 1 = instance k.
struct LabelMap : Raster<std::int32_t> {
  using Raster::Raster;
  std::int32_t max_label() const noexcept {
    std::int32_t m = 0;
    for (auto v : storage()) m = v > m ? v : m;
    return m;
  }
  std::size_t foreground_count() const noexcept {
    std::size_t n = 0;
    for (auto v : storage()) n += v != 0;
    return n;
  }
};

/// Non-negative gradient magnitudes.
struct GradientImage : Raster<double> {
  using Raster::Raster;
};

}  // namespace nalg
