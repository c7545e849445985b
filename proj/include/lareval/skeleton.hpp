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

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lareval/errors.hpp"
#include "lareval/mask.hpp"

namespace lareval {

/// One-pixel-wide thinning result. Guarantees: no 2×2 block of set pixels,
/// every pixel set in the source, same number of 8-connected components.
struct Skeleton {
  BinaryMask mask;
  std::int64_t source_area = 0;
};

struct PixelCount {};
struct GeodesicChain {};
struct PolylineFit {
  double epsilon = 1.5;
};

using LengthEstimator = std::variant<PixelCount, GeodesicChain, PolylineFit>;

/// "pixel", "geodesic" or "polyline". Throws kRange for unknown names or a
/// nonpositive epsilon.
LengthEstimator make_estimator(const std::string& name, double epsilon = 1.5);
std::string estimator_name(const LengthEstimator& estimator);

/// Topology-preserving iterative thinning: directional sub-iterations delete
/// simple, non-end pixels sequentially until stable.
Skeleton skeletonize(const BinaryMask& m);

/// PixelCount counts every skeleton pixel. GeodesicChain is the diameter of
/// the largest component in the 8-neighbour graph (axial step 1, diagonal
/// step √2). PolylineFit simplifies that diameter path with Douglas-Peucker
/// and sums segment lengths.
double skeleton_length(const Skeleton& s, const LengthEstimator& estimator);

/// Skeletonizes `m` and returns the longest per-component length.
double longest_fragment_length(const BinaryMask& m, const LengthEstimator& estimator);

/// Per-component lengths of an already skeletonized mask, in component order
/// (descending pixel count, then raster position).
std::vector<double> fragment_lengths(const Skeleton& s, const LengthEstimator& estimator);

/// Pixel sequence realising the geodesic diameter of the largest component.
/// Throws kEmptiness for an empty skeleton.
std::vector<Point2i> trace_diameter_path(const Skeleton& s);

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Distance from p to the closed segment [a, b].
template <typename Scalar>
Scalar segment_distance(const Vec2<Scalar>& p, const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  const Vec2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 == Scalar(0)) return (p - a).norm();
  const Scalar t = std::clamp((p - a).dot(ab) / len2, Scalar(0), Scalar(1));
  return (p - (a + t * ab)).norm();
}

/// Douglas-Peucker simplification; endpoints are always kept and every input
/// point ends up within `epsilon` of the output polyline.
template <typename Scalar>
std::vector<Vec2<Scalar>> simplify_polyline(std::span<const Vec2<Scalar>> path, Scalar epsilon) {
  if (path.size() < 2) {
    throw Error(ErrorKind::kEmptiness, "polyline simplification needs at least 2 points");
  }
  if (!(epsilon > Scalar(0))) throw Error(ErrorKind::kRange, "epsilon must be > 0");
  std::vector<char> keep(path.size(), 0);
  keep.front() = keep.back() = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, path.size() - 1}};
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    Scalar worst = Scalar(0);
    std::size_t worst_index = first;
    for (std::size_t k = first + 1; k < last; ++k) {
      const Scalar d = segment_distance<Scalar>(path[k], path[first], path[last]);
      if (d > worst) {
        worst = d;
        worst_index = k;
      }
    }
    if (worst > epsilon) {
      keep[worst_index] = 1;
      stack.emplace_back(first, worst_index);
      stack.emplace_back(worst_index, last);
    }
  }
  std::vector<Vec2<Scalar>> out;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (keep[k]) out.push_back(path[k]);
  }
  return out;
}

template <typename Scalar>
Scalar polyline_length(std::span<const Vec2<Scalar>> points) {
  Scalar total = Scalar(0);
  for (std::size_t k = 1; k < points.size(); ++k) total += (points[k] - points[k - 1]).norm();
  return total;
}

}  // namespace lareval
