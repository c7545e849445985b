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

#include "lareval/mask.hpp"

#include <algorithm>
#include <string>

#include "lareval/errors.hpp"

namespace lareval {

BinaryMask::BinaryMask(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::kShape, "mask dimensions must be >= 1, got " + std::to_string(width) +
                                       "x" + std::to_string(height));
  }
  bits_ = MaskArray::Zero(height, width);
}

BinaryMask::BinaryMask(const MaskArray& values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw Error(ErrorKind::kShape, "mask dimensions must be >= 1");
  }
  bits_ = (values != 0).cast<std::uint8_t>();
}

std::int64_t BinaryMask::area() const {
  const std::uint8_t* p = bits_.data();
  return std::count(p, p + bits_.size(), std::uint8_t{1});
}

std::vector<Point2i> foreground_pixels(const BinaryMask& m) {
  std::vector<Point2i> out;
  const int w = m.width();
  const std::uint8_t* p = m.data();
  for (std::int64_t i = 0; i < m.pixel_count(); ++i) {
    if (p[i]) out.emplace_back(static_cast<int>(i % w), static_cast<int>(i / w));
  }
  return out;
}

BinaryMask crop(const BinaryMask& m, const PixelBox& box) {
  BinaryMask out(box.width(), box.height());
  for (int y = 0; y < box.height(); ++y) {
    for (int x = 0; x < box.width(); ++x) {
      out.set(x, y, m.at(box.x_min + x, box.y_min + y));
    }
  }
  return out;
}

BinaryMask translate(const BinaryMask& m, int dx, int dy) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    const int ty = y + dy;
    if (ty < 0 || ty >= m.height()) continue;
    for (int x = 0; x < m.width(); ++x) {
      const int tx = x + dx;
      if (m(x, y) && tx >= 0 && tx < m.width()) out.set(tx, ty);
    }
  }
  return out;
}

}  // namespace lareval
