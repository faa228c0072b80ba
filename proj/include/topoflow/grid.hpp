#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <vector>

namespace topoflow {

// Dense row-major 2D buffer, top row first.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept {
    assert(in_bounds(x, y));
    return data_[index(x, y)];
  }
  const T& operator()(int x, int y) const noexcept {
    assert(in_bounds(x, y));
    return data_[index(x, y)];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Rgba = std::array<std::uint8_t, 4>;

// 8-bit straight-alpha RGBA image.
using Image = Grid<Rgba>;

// Boolean masks are stored as bytes (0/1) so std::vector<bool> packing never
// gets in the way of parallel writes.
using Mask = Grid<std::uint8_t>;

inline constexpr Rgba kTransparent{0, 0, 0, 0};

}  // namespace topoflow
