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

// Small mask builders shared by the tests.

#pragma once

#include <cmath>
#include <random>

#include "lareval/mask.hpp"

namespace testutil {

using lareval::BinaryMask;

// Pixels whose centre lies within half_width of the segment (x0,y0)-(x1,y1).
inline void draw_segment(BinaryMask& m, double x0, double y0, double x1, double y1,
                         double half_width) {
  const double vx = x1 - x0, vy = y1 - y0;
  const double len2 = vx * vx + vy * vy;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const double px = x + 0.5 - x0, py = y + 0.5 - y0;
      double t = len2 > 0 ? (px * vx + py * vy) / len2 : 0.0;
      t = std::fmin(1.0, std::fmax(0.0, t));
      const double dx = px - t * vx, dy = py - t * vy;
      if (dx * dx + dy * dy <= half_width * half_width) m.set(x, y);
    }
}

inline BinaryMask segment(int w, int h, double x0, double y0, double x1, double y1,
                          double half_width) {
  BinaryMask m(w, h);
  draw_segment(m, x0, y0, x1, y1, half_width);
  return m;
}

inline BinaryMask rect(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y);
  return m;
}

inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (on(rng)) m.set(x, y);
  return m;
}

// A few random rectangles and thick segments: blob-like shapes with holes,
// branches and touching parts.
inline BinaryMask random_blobs(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> n_parts(1, 5);
  std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h), uhw(0.5, 4.0);
  std::uniform_int_distribution<int> kind(0, 2);
  BinaryMask m(w, h);
  const int n = n_parts(rng);
  for (int k = 0; k < n; ++k) {
    const double ax = ux(rng), ay = uy(rng), bx = ux(rng), by = uy(rng);
    switch (kind(rng)) {
      case 0:
        draw_segment(m, ax, ay, bx, by, uhw(rng));
        break;
      case 1: {
        const int x0 = static_cast<int>(std::fmin(ax, bx)), x1 = static_cast<int>(std::fmax(ax, bx));
        const int y0 = static_cast<int>(std::fmin(ay, by)), y1 = static_cast<int>(std::fmax(ay, by));
        for (int y = y0; y <= y1 && y < h; ++y)
          for (int x = x0; x <= x1 && x < w; ++x) m.set(x, y);
        break;
      }
      default: {
        // ring
        const double r = uhw(rng) * 4 + 3;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const double d = std::hypot(x + 0.5 - ax, y + 0.5 - ay);
            if (d <= r && d >= r - 2) m.set(x, y);
          }
      }
    }
  }
  return m;
}

}  // namespace testutil
