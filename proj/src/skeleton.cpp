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

#include "lareval/skeleton.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <queue>

#include "lareval/mask_ops.hpp"

namespace lareval {
namespace {

// Neighbour k of (x, y) is (x + kDx[k], y + kDy[k]); order E, NE, N, NW, W, SW, S, SE.
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, -1, -1, -1, 0, 1, 1, 1};

// Yokoi 8-connectivity number of a 3×3 neighbourhood code.
int connectivity_number(unsigned code) {
  auto bg = [&](int k) { return ((code >> (k % 8)) & 1u) ? 0 : 1; };
  int n = 0;
  for (int k = 0; k < 8; k += 2) n += bg(k) - bg(k) * bg(k + 1) * bg(k + 2);
  return n;
}

// Deletable: simple (connectivity number 1) and not an end pixel.
const std::array<bool, 256>& deletable_table() {
  static const std::array<bool, 256> table = [] {
    std::array<bool, 256> t{};
    for (unsigned code = 0; code < 256; ++code) {
      const int neighbours = std::popcount(code);
      t[code] = connectivity_number(code) == 1 && neighbours >= 2;
    }
    return t;
  }();
  return table;
}

// Zero-padded local copy of a mask window; index = (y + 1) * stride + (x + 1).
struct Grid {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  int stride = 0;
  std::vector<std::uint8_t> cells;
  std::array<int, 8> offsets{};

  Grid(const BinaryMask& m, const PixelBox& box)
      : x0(box.x_min), y0(box.y_min), width(box.width()), height(box.height()),
        stride(box.width() + 2),
        cells(static_cast<std::size_t>(box.width() + 2) * (box.height() + 2), 0) {
    for (int k = 0; k < 8; ++k) offsets[k] = kDy[k] * stride + kDx[k];
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) cells[index(x, y)] = m(x0 + x, y0 + y) ? 1 : 0;
    }
  }

  int index(int x, int y) const { return (y + 1) * stride + (x + 1); }
  Point2i point(int idx) const { return {idx % stride - 1 + x0, idx / stride - 1 + y0}; }

  unsigned code(int idx) const {
    unsigned c = 0;
    for (int k = 0; k < 8; ++k) c |= static_cast<unsigned>(cells[idx + offsets[k]]) << k;
    return c;
  }

  std::vector<int> foreground() const {
    std::vector<int> out;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (cells[index(x, y)]) out.push_back(index(x, y));
      }
    }
    return out;
  }
};

void compact(const Grid& g, std::vector<int>& list) {
  list.erase(std::remove_if(list.begin(), list.end(), [&](int idx) { return !g.cells[idx]; }),
             list.end());
}

void thin_until_stable(Grid& g, std::vector<int>& list) {
  const auto& deletable = deletable_table();
  // North, south, east, west border passes.
  const std::array<int, 4> border = {g.offsets[2], g.offsets[6], g.offsets[0], g.offsets[4]};
  std::vector<int> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const int off : border) {
      // Border status is taken before the pass; deletions are sequential.
      candidates.clear();
      for (const int idx : list) {
        if (!g.cells[idx + off]) candidates.push_back(idx);
      }
      bool pass_changed = false;
      for (const int idx : candidates) {
        if (deletable[g.code(idx)]) {
          g.cells[idx] = 0;
          pass_changed = true;
        }
      }
      if (pass_changed) {
        compact(g, list);
        changed = true;
      }
    }
  }
}

// 8-connected labels over `list` (raster ordered); returns per-entry label
// and per-label sizes.
std::pair<std::vector<int>, std::vector<int>> label(const Grid& g, const std::vector<int>& list) {
  std::vector<int> slot(g.cells.size(), -1);
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (g.cells[list[i]]) slot[list[i]] = static_cast<int>(i);
  }
  std::vector<int> labels(list.size(), -1);
  std::vector<int> sizes;
  std::vector<int> stack;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (slot[list[i]] < 0 || labels[i] >= 0) continue;
    const int lab = static_cast<int>(sizes.size());
    sizes.push_back(0);
    labels[i] = lab;
    stack.assign(1, static_cast<int>(i));
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      ++sizes[lab];
      for (const int off : g.offsets) {
        const int n = slot[list[cur] + off];
        if (n >= 0 && labels[n] < 0) {
          labels[n] = lab;
          stack.push_back(n);
        }
      }
    }
  }
  return {std::move(labels), std::move(sizes)};
}

// Pixels that are left disconnected from the largest piece when `idx` is
// cleared. Returns the indices that would have to go along with it.
std::vector<int> detached_by_removal(Grid& g, const std::vector<int>& list, int idx) {
  g.cells[idx] = 0;
  const auto [labels, sizes] = label(g, list);
  g.cells[idx] = 1;
  std::vector<int> pieces;
  std::vector<int> pos(g.cells.size(), -1);
  for (std::size_t i = 0; i < list.size(); ++i) pos[list[i]] = static_cast<int>(i);
  for (const int off : g.offsets) {
    const int p = pos[idx + off];
    if (p >= 0 && g.cells[list[p]] && labels[p] >= 0 &&
        std::find(pieces.begin(), pieces.end(), labels[p]) == pieces.end()) {
      pieces.push_back(labels[p]);
    }
  }
  if (pieces.size() <= 1) return {};
  // Keep the biggest piece; the earliest-labelled one wins ties.
  std::sort(pieces.begin(), pieces.end());
  int keep = pieces.front();
  for (const int lab : pieces) {
    if (sizes[lab] > sizes[keep]) keep = lab;
  }
  std::vector<int> drop;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (labels[i] >= 0 && labels[i] != keep &&
        std::find(pieces.begin(), pieces.end(), labels[i]) != pieces.end()) {
      drop.push_back(list[i]);
    }
  }
  return drop;
}

// A converged thinning can still hold a 2×2 block whose four pixels each carry
// a private diagonal branch (an X crossing). Breaking such a block costs the
// smallest branch. Returns false when no block is left.
bool break_one_block(Grid& g, std::vector<int>& list) {
  const int s = g.stride;
  for (const int idx : list) {
    if (!(g.cells[idx] && g.cells[idx + 1] && g.cells[idx + s] && g.cells[idx + s + 1])) continue;
    const std::array<int, 4> corners = {idx, idx + 1, idx + s, idx + s + 1};
    std::vector<int> best_drop;
    int best = -1;
    for (const int c : corners) {
      auto drop = detached_by_removal(g, list, c);
      if (best < 0 || drop.size() < best_drop.size()) {
        best = c;
        best_drop = std::move(drop);
      }
    }
    g.cells[best] = 0;
    for (const int d : best_drop) g.cells[d] = 0;
    compact(g, list);
    return true;
  }
  return false;
}

// Exact path cost a + b·√2 with integer step counts.
struct Chain {
  std::int64_t axial = 0;
  std::int64_t diagonal = 0;

  double value() const { return static_cast<double>(axial) + std::sqrt(2.0) * diagonal; }

  friend bool operator<(const Chain& l, const Chain& r) {
    // l < r  <=>  d < e·√2 with d = l.axial - r.axial, e = r.diagonal - l.diagonal.
    const std::int64_t d = l.axial - r.axial;
    const std::int64_t e = r.diagonal - l.diagonal;
    if (d < 0 && e >= 0) return true;
    if (d >= 0 && e <= 0) return false;
    if (d >= 0) return d * d < 2 * e * e;
    return d * d > 2 * e * e;
  }
  friend bool operator==(const Chain&, const Chain&) = default;
};

struct Diameter {
  Chain cost;
  std::vector<Point2i> path;
};

// Geodesic diameter of one 8-connected pixel set given in raster order.
Diameter chain_diameter(const std::vector<Point2i>& pixels) {
  if (pixels.empty()) return {};
  if (pixels.size() == 1) return {Chain{}, {pixels.front()}};
  int x_min = pixels.front().x();
  int x_max = x_min;
  int y_min = pixels.front().y();
  int y_max = pixels.back().y();
  for (const auto& p : pixels) {
    x_min = std::min(x_min, p.x());
    x_max = std::max(x_max, p.x());
  }
  const int stride = x_max - x_min + 3;
  std::vector<int> node_at(static_cast<std::size_t>(stride) * (y_max - y_min + 3), -1);
  auto cell = [&](int x, int y) { return (y - y_min + 1) * stride + (x - x_min + 1); };
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    node_at[cell(pixels[i].x(), pixels[i].y())] = static_cast<int>(i);
  }
  const int n = static_cast<int>(pixels.size());
  std::vector<std::array<int, 8>> adj(n);
  std::vector<int> degree(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 8; ++k) {
      adj[i][k] = node_at[cell(pixels[i].x() + kDx[k], pixels[i].y() + kDy[k])];
      if (adj[i][k] >= 0) ++degree[i];
    }
  }
  std::vector<int> sources;
  for (int i = 0; i < n; ++i) {
    if (degree[i] <= 1) sources.push_back(i);
  }
  if (sources.empty()) sources.push_back(0);

  std::vector<Chain> dist(n);
  std::vector<int> pred(n);
  std::vector<char> done(n);
  using Entry = std::pair<Chain, int>;
  auto later = [](const Entry& a, const Entry& b) {
    if (a.first == b.first) return a.second > b.second;
    return b.first < a.first;
  };
  Diameter best;
  bool have_best = false;
  std::vector<int> best_pred;
  int best_source = -1;
  int best_target = -1;
  for (const int src : sources) {
    std::fill(done.begin(), done.end(), 0);
    std::fill(pred.begin(), pred.end(), -1);
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> queue(later);
    dist[src] = Chain{};
    queue.emplace(dist[src], src);
    std::vector<char> reached(n, 0);
    reached[src] = 1;
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (int k = 0; k < 8; ++k) {
        const int v = adj[u][k];
        if (v < 0 || done[v]) continue;
        Chain nd = d;
        (k % 2 == 0 ? nd.axial : nd.diagonal) += 1;
        if (!reached[v] || nd < dist[v]) {
          reached[v] = 1;
          dist[v] = nd;
          pred[v] = u;
          queue.emplace(nd, v);
        }
      }
    }
    int far = src;
    for (int v = 0; v < n; ++v) {
      if (dist[far] < dist[v]) far = v;
    }
    if (!have_best || best.cost < dist[far]) {
      have_best = true;
      best.cost = dist[far];
      best_pred = pred;
      best_source = src;
      best_target = far;
    }
  }
  for (int v = best_target; v >= 0; v = v == best_source ? -1 : best_pred[v]) {
    best.path.push_back(pixels[v]);
  }
  std::reverse(best.path.begin(), best.path.end());
  return best;
}

// 8-connected components of a mask as raster-ordered pixel lists, ordered by
// descending size and then by first pixel.
std::vector<std::vector<Point2i>> pixel_components(const BinaryMask& m) {
  const auto box = try_bounding_box(m);
  if (!box) return {};
  const Grid g(m, *box);
  const std::vector<int> list = g.foreground();
  const auto [labels, sizes] = label(g, list);
  std::vector<std::vector<Point2i>> comps(sizes.size());
  for (std::size_t i = 0; i < list.size(); ++i) comps[labels[i]].push_back(g.point(list[i]));
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

double component_length(const std::vector<Point2i>& pixels, const LengthEstimator& estimator) {
  if (std::holds_alternative<PixelCount>(estimator)) return static_cast<double>(pixels.size());
  const Diameter dia = chain_diameter(pixels);
  if (std::holds_alternative<GeodesicChain>(estimator)) return dia.cost.value();
  if (dia.path.size() < 2) return 0.0;
  std::vector<Vec2<double>> path;
  path.reserve(dia.path.size());
  for (const auto& p : dia.path) path.push_back(p.cast<double>());
  const auto simplified =
      simplify_polyline<double>(path, std::get<PolylineFit>(estimator).epsilon);
  return polyline_length<double>(simplified);
}

}  // namespace

LengthEstimator make_estimator(const std::string& name, double epsilon) {
  if (name == "pixel") return PixelCount{};
  if (name == "geodesic") return GeodesicChain{};
  if (name == "polyline") {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::kRange, "polyline epsilon must be > 0");
    return PolylineFit{epsilon};
  }
  throw Error(ErrorKind::kRange,
              "unknown estimator '" + name + "' (expected pixel, geodesic or polyline)");
}

std::string estimator_name(const LengthEstimator& estimator) {
  if (std::holds_alternative<PixelCount>(estimator)) return "pixel";
  if (std::holds_alternative<GeodesicChain>(estimator)) return "geodesic";
  return "polyline";
}

Skeleton skeletonize(const BinaryMask& m) {
  const auto box = try_bounding_box(m);
  if (!box) return {m, 0};
  Grid g(m, *box);
  std::vector<int> list = g.foreground();
  const auto source_area = static_cast<std::int64_t>(list.size());
  do {
    thin_until_stable(g, list);
  } while (break_one_block(g, list));
  BinaryMask out(m.width(), m.height());
  for (const int idx : list) {
    const Point2i p = g.point(idx);
    out.set(p.x(), p.y());
  }
  return {std::move(out), source_area};
}

double skeleton_length(const Skeleton& s, const LengthEstimator& estimator) {
  if (std::holds_alternative<PixelCount>(estimator)) return static_cast<double>(s.mask.area());
  const auto comps = pixel_components(s.mask);
  if (comps.empty()) return 0.0;
  return component_length(comps.front(), estimator);
}

std::vector<double> fragment_lengths(const Skeleton& s, const LengthEstimator& estimator) {
  std::vector<double> out;
  for (const auto& comp : pixel_components(s.mask)) out.push_back(component_length(comp, estimator));
  return out;
}

double longest_fragment_length(const BinaryMask& m, const LengthEstimator& estimator) {
  const auto lengths = fragment_lengths(skeletonize(m), estimator);
  return lengths.empty() ? 0.0 : *std::max_element(lengths.begin(), lengths.end());
}

std::vector<Point2i> trace_diameter_path(const Skeleton& s) {
  const auto comps = pixel_components(s.mask);
  if (comps.empty()) throw Error(ErrorKind::kEmptiness, "cannot trace an empty skeleton");
  return chain_diameter(comps.front()).path;
}

}  // namespace lareval
