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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lareval/annotation_io.hpp"
#include "lareval/mask.hpp"
#include "lareval/skeleton.hpp"

namespace lareval {

/// How predictions are consumed while walking the ground-truth list.
enum class MatchingMode {
  kPaperOrder,    // GT order; a prediction is removed only when it matched
  kStrictPaper,   // GT order; the best overlapping prediction is removed even on a miss
  kGlobalGreedy,  // all pairs by descending IoU; independent of list order
};

std::string to_string(MatchingMode mode);
/// "paper", "strict" or "greedy".
MatchingMode parse_matching_mode(const std::string& name);

struct MatchConfig {
  double iou_threshold = 0.5;
  MatchingMode mode = MatchingMode::kPaperOrder;
  LengthEstimator estimator = GeodesicChain{};
  double score_threshold = 0.0;

  /// Throws kRange when a field is outside its interval.
  void validate() const;
};

struct MatchRecord {
  std::int64_t gt_id = 0;
  std::optional<std::size_t> matched_pred_index;
  double iou = 0.0;
  double gt_length = 0.0;
  double pred_length = 0.0;
  /// |gt − pred| / gt; absent for misses and zero-length ground truth.
  std::optional<double> relative_error;
  double lar = 0.0;
  /// Matched, but the ground-truth skeleton has zero length.
  bool degenerate_gt = false;

  bool matched() const { return matched_pred_index.has_value(); }
};

struct LarResult {
  std::vector<MatchRecord> records;
  /// Mean over all ground-truth instances; 0 when there are none.
  double mean_lar = 0.0;
};

/// gt × pred mask IoU, skipping pairs whose boxes do not overlap.
Eigen::MatrixXd mask_iou_matrix(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds);
Eigen::MatrixXd box_iou_matrix(std::span<const PixelBox> gts, std::span<const PixelBox> preds);

/// Length-aware recall. Record i carries gt_id = i.
LarResult match_lar(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                    const MatchConfig& config);

/// Same, with a precomputed gt × pred IoU matrix.
LarResult match_lar(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                    const Eigen::MatrixXd& ious, const MatchConfig& config);

enum class IouKind { kMask, kBox };
std::string to_string(IouKind kind);

/// IoU thresholds 0.50, 0.55, ..., 0.90.
const std::array<double, 9>& iou_thresholds();

/// One image's detections for AP: gt × pred IoU of the chosen kind plus the
/// prediction scores.
struct ImageDetections {
  Eigen::MatrixXd ious;
  std::vector<double> scores;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

/// Precision/recall after each prediction, in global score order (ties by
/// image order, then prediction order).
std::vector<PrPoint> pr_curve(std::span<const ImageDetections> images, double iou_threshold);

/// 101-point interpolated AP over recall 0, 0.01, ..., 1 of the precision
/// envelope. 0 when the dataset has no ground truth.
double average_precision(std::span<const ImageDetections> images, double iou_threshold);

/// Single-image convenience.
double average_precision(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                         std::span<const double> scores, double iou_threshold, IouKind kind);

struct ApSummary {
  std::array<double, 9> ap_by_threshold{};
  double map50 = 0.0;
  double map50_90 = 0.0;
};

ApSummary map_summary(std::span<const ImageDetections> images);
ApSummary map_summary(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                      std::span<const double> scores, IouKind kind);

/// Greedy NMS. Returns indices of the kept predictions in descending score
/// order; a candidate is dropped when its IoU with a kept one exceeds
/// `overlap_threshold`.
std::vector<std::size_t> mask_nms(std::span<const BinaryMask> preds, std::span<const double> scores,
                                  double overlap_threshold, IouKind level);

struct ImageRecords {
  std::int64_t image_id = 0;
  std::vector<MatchRecord> records;
};

struct EvaluationReport {
  MatchConfig config;
  double mean_lar = 0.0;
  std::vector<ImageRecords> images;
  ApSummary mask;
  ApSummary box;
  std::int64_t n_gt = 0;
  std::int64_t n_pred = 0;
  std::int64_t n_matched = 0;
  std::vector<std::string> diagnostics;
};

/// Per-image matching on each image's canvas; LAR averaged over every
/// ground-truth instance and AP accumulated dataset-wide. `threads` <= 0 uses
/// the available hardware parallelism; the result does not depend on it.
EvaluationReport evaluate_dataset(const DatasetDescriptor& descriptor,
                                  std::span<const GtInstance> gts,
                                  std::span<const PredInstance> preds, const MatchConfig& config,
                                  int threads = 1);

}  // namespace lareval
