#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace depthrefine {

// Raised when an argument lies outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Dense row-major H x W grid. Column index u runs left to right, row index v
// top to bottom; (0, 0) is the center of the top-left pixel.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw DomainError("grid dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }
  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return same_shape(other.width(), other.height());
  }

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  T& operator()(int u, int v) { return data_[index(u, v)]; }
  const T& operator()(int u, int v) const { return data_[index(u, v)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Per-pixel metric depth along the camera z axis. A pixel is valid iff its
// value is finite and strictly positive; 0 is the conventional "missing" value.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, double fill = 0.0) : grid_(width, height, fill) {}
  explicit DepthMap(Grid<double> grid) : grid_(std::move(grid)) {}

  int width() const { return grid_.width(); }
  int height() const { return grid_.height(); }
  std::size_t size() const { return grid_.size(); }

  double& operator()(int u, int v) { return grid_(u, v); }
  double operator()(int u, int v) const { return grid_(u, v); }
  double& operator[](std::size_t i) { return grid_[i]; }
  double operator[](std::size_t i) const { return grid_[i]; }

  static bool valid_value(double d) { return std::isfinite(d) && d > 0.0; }
  bool valid(int u, int v) const { return valid_value(grid_(u, v)); }

  Grid<double>& grid() { return grid_; }
  const Grid<double>& grid() const { return grid_; }

  friend bool operator==(const DepthMap& a, const DepthMap& b) { return a.grid_ == b.grid_; }

 private:
  Grid<double> grid_;
};

// Single-channel intensity image, nominally in [0, 1].
using Image = Grid<double>;

}  // namespace depthrefine
