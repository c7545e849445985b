// Copyright 2026 The lareval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace lareval {

/// Row-major byte raster; row index is y, column index is x.
using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Point2i = Eigen::Vector2i;

/// Dense binary raster of one instance on a fixed canvas. Stored values are
/// always 0 or 1.
class BinaryMask {
 public:
  /// All-background canvas. Throws kShape when a dimension is < 1.
  BinaryMask(int width, int height);

  /// Any nonzero entry becomes foreground.
  explicit BinaryMask(const MaskArray& values);

  int width() const noexcept { return static_cast<int>(bits_.cols()); }
  int height() const noexcept { return static_cast<int>(bits_.rows()); }
  std::int64_t pixel_count() const noexcept { return bits_.size(); }

  bool operator()(int x, int y) const { return bits_(y, x) != 0; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width() && y < height();
  }
  /// Out-of-canvas reads are background.
  bool at(int x, int y) const noexcept { return contains(x, y) && bits_(y, x) != 0; }
  void set(int x, int y, bool value = true) { bits_(y, x) = value ? 1 : 0; }

  std::int64_t area() const;
  bool empty() const { return area() == 0; }

  const MaskArray& array() const noexcept { return bits_; }
  const std::uint8_t* data() const noexcept { return bits_.data(); }
  std::uint8_t* data() noexcept { return bits_.data(); }

  bool same_canvas(const BinaryMask& other) const noexcept {
    return width() == other.width() && height() == other.height();
  }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.same_canvas(b) && (a.bits_ == b.bits_).all();
  }

 private:
  MaskArray bits_;
};

/// Inclusive pixel box.
struct PixelBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(width()) * height();
  }
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Foreground pixel coordinates in raster order (y, then x).
std::vector<Point2i> foreground_pixels(const BinaryMask& m);

/// Copies the inclusive window `box` of `m` into a new mask of the box size.
BinaryMask crop(const BinaryMask& m, const PixelBox& box);

/// Translates `m` by (dx, dy); pixels leaving the canvas are dropped.
BinaryMask translate(const BinaryMask& m, int dx, int dy);

}  // namespace lareval
