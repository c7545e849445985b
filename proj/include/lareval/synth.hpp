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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lareval/annotation_io.hpp"
#include "lareval/mask.hpp"

namespace lareval {

/// Centreline given as a control polygon; the curve is the composite of
/// quadratic Béziers joining consecutive leg midpoints (first and last
/// control points are the curve ends). C1 continuous.
struct CurveSpec {
  std::vector<Point2d> control_points;  // at least 3
  int width = 5;                        // odd stroke width in pixels
  int canvas_width = 512;
  int canvas_height = 512;
  std::uint64_t seed = 0;
};

/// Arc length by sampling, doubling the sample count until the estimate
/// changes by less than 0.01 %.
double analytic_length(const CurveSpec& curve);

/// Point on the curve at the given fraction of its arc length.
Point2d point_at_fraction(const CurveSpec& curve, double fraction);

/// Unit tangent at the given fraction of arc length.
Point2d tangent_at_fraction(const CurveSpec& curve, double fraction);

/// Pixels whose centre lies within width / 2 of the centreline.
BinaryMask render_curve(const CurveSpec& curve);

struct SynthInstance {
  GtInstance gt;  // RLE geometry
  CurveSpec curve;
  double length = 0.0;  // analytic centreline length
  BinaryMask mask{1, 1};
};

struct Scene {
  ImageInfo image;
  std::vector<SynthInstance> instances;
};

struct SceneParams {
  int n_instances = 5;
  int canvas_width = 512;
  int canvas_height = 512;
  int min_width = 3;
  int max_width = 7;
  double min_length = 80.0;
  double max_length = 200.0;
  std::int64_t image_id = 1;
  std::int64_t first_annotation_id = 1;
  /// Maximum heading change between consecutive control legs, degrees.
  double max_turn_degrees = 35.0;
};

/// Seed-deterministic scene of smooth curves whose pairwise mask IoU stays
/// below 0.3. Throws kPlacement after 1000 rejected placements and kRange for
/// empty ranges.
Scene generate_scene(std::uint64_t seed, const SceneParams& params);

/// Single curve with the given stroke width and approximate length, placed at
/// random on the canvas.
CurveSpec random_curve(std::uint64_t seed, int canvas_width, int canvas_height, int width,
                       double target_length, double max_turn_degrees = 35.0);

struct Erode {
  int radius = 1;
};
struct Dilate {
  int radius = 1;
};
struct Fracture {
  double gap_px = 3.0;
  double position_fraction = 0.5;
};
struct Shift {
  int dx = 0;
  int dy = 0;
};
struct Drop {};
struct Duplicate {
  double score_delta = 0.1;
};

using PerturbationSpec = std::variant<Erode, Dilate, Fracture, Shift, Drop, Duplicate>;

/// Parses "erode:R", "dilate:R", "fracture:GAP:POS", "shift:DX:DY", "drop",
/// "duplicate:DELTA" and "none" (= shift:0:0).
PerturbationSpec parse_perturbation(const std::string& text);

struct PerturbResult {
  std::vector<PredInstance> predictions;
  std::optional<std::string> diagnostic;
};

/// Applies one perturbation. Predictions carry score 1.0 except the second
/// copy of Duplicate. Erosion that empties the mask yields no prediction and a
/// diagnostic.
PerturbResult perturb(const SynthInstance& instance, const PerturbationSpec& spec,
                      std::uint64_t seed);

/// COCO instance JSON for a set of scenes (single category "dislocation").
std::string write_coco_ground_truth(const std::vector<Scene>& scenes);

}  // namespace lareval
