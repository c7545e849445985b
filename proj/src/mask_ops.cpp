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

#include "lareval/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lareval/errors.hpp"

namespace lareval {
namespace {

void require_same_canvas(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_canvas(b)) {
    throw Error(ErrorKind::kShape,
                "canvas mismatch: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

// Half-width of the disc row at vertical offset dy.
std::vector<int> disc_half_widths(int radius) {
  std::vector<int> hw(2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    int h = 0;
    while ((h + 1) * (h + 1) + dy * dy <= radius * radius) ++h;
    hw[dy + radius] = h;
  }
  return hw;
}

// Row prefix sums: sums(y, x + 1) = foreground count of row y in [0, x].
Eigen::ArrayXXi row_prefix_sums(const MaskArray& a) {
  Eigen::ArrayXXi sums = Eigen::ArrayXXi::Zero(a.rows(), a.cols() + 1);
  for (Eigen::Index y = 0; y < a.rows(); ++y) {
    for (Eigen::Index x = 0; x < a.cols(); ++x) sums(y, x + 1) = sums(y, x) + a(y, x);
  }
  return sums;
}

// Disc dilation / erosion of a local array; everything outside is background.
MaskArray dilate_local(const MaskArray& a, int radius) {
  const Eigen::Index h = a.rows();
  const Eigen::Index w = a.cols();
  const auto hw = disc_half_widths(radius);
  const Eigen::ArrayXXi sums = row_prefix_sums(a);
  MaskArray out = MaskArray::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (int dy = -radius; dy <= radius; ++dy) {
      const Eigen::Index sy = y + dy;
      if (sy < 0 || sy >= h || sums(sy, w) == 0) continue;
      const int r = hw[dy + radius];
      for (Eigen::Index x = 0; x < w; ++x) {
        if (out(y, x)) continue;
        const Eigen::Index lo = std::max<Eigen::Index>(0, x - r);
        const Eigen::Index hi = std::min<Eigen::Index>(w - 1, x + r);
        if (sums(sy, hi + 1) - sums(sy, lo) > 0) out(y, x) = 1;
      }
    }
  }
  return out;
}

MaskArray erode_local(const MaskArray& a, int radius) {
  const Eigen::Index h = a.rows();
  const Eigen::Index w = a.cols();
  const auto hw = disc_half_widths(radius);
  const Eigen::ArrayXXi sums = row_prefix_sums(a);
  MaskArray out = MaskArray::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!a(y, x)) continue;
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        const Eigen::Index sy = y + dy;
        const int r = hw[dy + radius];
        if (sy < 0 || sy >= h || x - r < 0 || x + r >= w) {
          keep = false;
        } else {
          keep = sums(sy, x + r + 1) - sums(sy, x - r) == 2 * r + 1;
        }
      }
      out(y, x) = keep ? 1 : 0;
    }
  }
  return out;
}

PixelBox expand_clipped(const PixelBox& b, int by, int width, int height) {
  return {std::max(0, b.x_min - by), std::max(0, b.y_min - by), std::min(width - 1, b.x_max + by),
          std::min(height - 1, b.y_max + by)};
}

void paste(BinaryMask& dst, const MaskArray& src, int x0, int y0) {
  for (Eigen::Index y = 0; y < src.rows(); ++y) {
    for (Eigen::Index x = 0; x < src.cols(); ++x) {
      const int tx = x0 + static_cast<int>(x);
      const int ty = y0 + static_cast<int>(y);
      if (src(y, x) && dst.contains(tx, ty)) dst.set(tx, ty);
    }
  }
}

template <typename Visit>
void for_each_neighbor(Connectivity c, Visit&& visit) {
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int n = c == Connectivity::kFour ? 4 : 8;
  for (int k = 0; k < n; ++k) visit(kDx[k], kDy[k]);
}

// Labels components inside `box`; returns per-component pixel lists in
// discovery (raster) order.
std::vector<std::vector<Point2i>> label_components(const BinaryMask& m, const PixelBox& box,
                                                   Connectivity connectivity) {
  const int bw = box.width();
  const int bh = box.height();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(bw) * bh, 0);
  std::vector<std::vector<Point2i>> comps;
  std::vector<Point2i> stack;
  for (int y = box.y_min; y <= box.y_max; ++y) {
    for (int x = box.x_min; x <= box.x_max; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y - box.y_min) * bw + (x - box.x_min);
      if (!m(x, y) || seen[idx]) continue;
      seen[idx] = 1;
      std::vector<Point2i> comp;
      stack.assign(1, Point2i(x, y));
      while (!stack.empty()) {
        const Point2i p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for_each_neighbor(connectivity, [&](int dx, int dy) {
          const int nx = p.x() + dx;
          const int ny = p.y() + dy;
          if (nx < box.x_min || ny < box.y_min || nx > box.x_max || ny > box.y_max) return;
          const std::size_t nidx =
              static_cast<std::size_t>(ny - box.y_min) * bw + (nx - box.x_min);
          if (m(nx, ny) && !seen[nidx]) {
            seen[nidx] = 1;
            stack.emplace_back(nx, ny);
          }
        });
      }
      comps.push_back(std::move(comp));
    }
  }
  return comps;
}

}  // namespace

double iou_mask(const BinaryMask& a, const BinaryMask& b) {
  require_same_canvas(a, b);
  const std::int64_t inter = ((a.array() != 0) && (b.array() != 0)).count();
  const std::int64_t uni = ((a.array() != 0) || (b.array() != 0)).count();
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::int64_t intersection_area(const BinaryMask& a, const PixelBox& box_a, const BinaryMask& b,
                               const PixelBox& box_b) {
  require_same_canvas(a, b);
  const int x0 = std::max(box_a.x_min, box_b.x_min);
  const int y0 = std::max(box_a.y_min, box_b.y_min);
  const int x1 = std::min(box_a.x_max, box_b.x_max);
  const int y1 = std::min(box_a.y_max, box_b.y_max);
  if (x0 > x1 || y0 > y1) return 0;
  const int w = a.width();
  std::int64_t inter = 0;
  for (int y = y0; y <= y1; ++y) {
    const std::uint8_t* pa = a.data() + static_cast<std::int64_t>(y) * w;
    const std::uint8_t* pb = b.data() + static_cast<std::int64_t>(y) * w;
    for (int x = x0; x <= x1; ++x) inter += pa[x] & pb[x];
  }
  return inter;
}

double iou_box(const PixelBox& a, const PixelBox& b) {
  const std::int64_t iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const std::int64_t ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  const std::int64_t inter = iw > 0 && ih > 0 ? iw * ih : 0;
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni <= 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<PixelBox> try_bounding_box(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  int y_min = -1;
  int y_max = -1;
  int x_min = w;
  int x_max = -1;
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = m.data() + static_cast<std::int64_t>(y) * w;
    const std::uint8_t* first = std::find(row, row + w, std::uint8_t{1});
    if (first == row + w) continue;
    if (y_min < 0) y_min = y;
    y_max = y;
    x_min = std::min<int>(x_min, static_cast<int>(first - row));
    int last = w - 1;
    while (!row[last]) --last;
    x_max = std::max(x_max, last);
  }
  if (y_min < 0) return std::nullopt;
  return PixelBox{x_min, y_min, x_max, y_max};
}

PixelBox bounding_box(const BinaryMask& m) {
  auto box = try_bounding_box(m);
  if (!box) throw Error(ErrorKind::kEmptiness, "bounding_box of an empty mask");
  return *box;
}

std::vector<BinaryMask> connected_components(const BinaryMask& m, Connectivity connectivity) {
  const auto box = try_bounding_box(m);
  if (!box) return {};
  auto comps = label_components(m, *box, connectivity);
  // Discovery order already sorts by first pixel; stable sort keeps it as the tie-break.
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::vector<BinaryMask> out;
  out.reserve(comps.size());
  for (const auto& comp : comps) {
    BinaryMask cm(m.width(), m.height());
    for (const auto& p : comp) cm.set(p.x(), p.y());
    out.push_back(std::move(cm));
  }
  return out;
}

int count_components(const BinaryMask& m, Connectivity connectivity) {
  const auto box = try_bounding_box(m);
  if (!box) return 0;
  return static_cast<int>(label_components(m, *box, connectivity).size());
}

BinaryMask fill_holes(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
  std::vector<Point2i> stack;
  auto seed = [&](int x, int y) {
    const std::size_t idx = static_cast<std::size_t>(y) * w + x;
    if (!m(x, y) && !outside[idx]) {
      outside[idx] = 1;
      stack.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const Point2i p = stack.back();
    stack.pop_back();
    for_each_neighbor(Connectivity::kFour, [&](int dx, int dy) {
      const int nx = p.x() + dx;
      const int ny = p.y() + dy;
      if (m.contains(nx, ny)) seed(nx, ny);
    });
  }
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.set(x, y, !outside[static_cast<std::size_t>(y) * w + x]);
    }
  }
  return out;
}

std::vector<Point2i> disc_offsets(int radius) {
  std::vector<Point2i> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) out.emplace_back(dx, dy);
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error(ErrorKind::kRange, "dilation radius must be >= 0");
  const auto box = try_bounding_box(m);
  if (!box || radius == 0) return m;
  const PixelBox win = expand_clipped(*box, radius, m.width(), m.height());
  const MaskArray local =
      m.array().block(win.y_min, win.x_min, win.height(), win.width());
  BinaryMask out(m.width(), m.height());
  paste(out, dilate_local(local, radius), win.x_min, win.y_min);
  return out;
}

BinaryMask erode(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error(ErrorKind::kRange, "erosion radius must be >= 0");
  const auto box = try_bounding_box(m);
  if (!box || radius == 0) return m;
  // Everything outside the box is background, on or off the canvas.
  const MaskArray local = m.array().block(box->y_min, box->x_min, box->height(), box->width());
  BinaryMask out(m.width(), m.height());
  paste(out, erode_local(local, radius), box->x_min, box->y_min);
  return out;
}

BinaryMask morphological_close(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error(ErrorKind::kRange, "closing radius must be >= 0");
  const auto box = try_bounding_box(m);
  if (!box || radius == 0) return m;
  const int pad = 2 * radius;
  MaskArray local = MaskArray::Zero(box->height() + 2 * pad, box->width() + 2 * pad);
  local.block(pad, pad, box->height(), box->width()) =
      m.array().block(box->y_min, box->x_min, box->height(), box->width());
  const MaskArray closed = erode_local(dilate_local(local, radius), radius);
  BinaryMask out(m.width(), m.height());
  paste(out, closed, box->x_min - pad, box->y_min - pad);
  return out;
}

}  // namespace lareval
