#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "normal_forge/errors.hpp"

namespace normal_forge {

// Dense row-major 2D grid. Pixel (x, y) is column x, row y.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw InvalidArgument("raster dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  std::span<T> row(int y) noexcept {
    return std::span<T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }
  std::span<const T> row(int y) const noexcept {
    return std::span<const T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Per-pixel boolean stored as 0/1 bytes.
using Mask = Raster<std::uint8_t>;

template <typename T, typename U>
void require_same_shape(const Raster<T>& a, const Raster<U>& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw DimensionMismatch(what + ": " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                            std::to_string(b.height()));
  }
}

}  // namespace normal_forge
