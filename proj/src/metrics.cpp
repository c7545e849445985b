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

#include "lareval/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "lareval/errors.hpp"
#include "lareval/mask_ops.hpp"

namespace lareval {
namespace {

constexpr int kRecallSteps = 101;

std::vector<std::optional<PixelBox>> boxes_of(std::span<const BinaryMask> masks) {
  std::vector<std::optional<PixelBox>> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(try_bounding_box(m));
  return out;
}

Eigen::MatrixXd mask_ious(std::span<const BinaryMask> gts,
                          const std::vector<std::optional<PixelBox>>& gt_boxes,
                          const std::vector<std::int64_t>& gt_areas,
                          std::span<const BinaryMask> preds,
                          const std::vector<std::optional<PixelBox>>& pred_boxes,
                          const std::vector<std::int64_t>& pred_areas) {
  Eigen::MatrixXd ious = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gts.size()),
                                               static_cast<Eigen::Index>(preds.size()));
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (std::size_t j = 0; j < preds.size(); ++j) {
      if (!gts[i].same_canvas(preds[j])) {
        throw Error(ErrorKind::kShape, "ground truth and prediction canvases differ");
      }
      if (!gt_boxes[i] || !pred_boxes[j]) continue;
      const std::int64_t inter = intersection_area(gts[i], *gt_boxes[i], preds[j], *pred_boxes[j]);
      if (inter == 0) continue;
      ious(i, j) = static_cast<double>(inter) /
                   static_cast<double>(gt_areas[i] + pred_areas[j] - inter);
    }
  }
  return ious;
}

std::vector<std::int64_t> areas_of(std::span<const BinaryMask> masks) {
  std::vector<std::int64_t> out;
  for (const auto& m : masks) out.push_back(m.area());
  return out;
}

void fill_lengths(MatchRecord& rec, const BinaryMask& gt, const BinaryMask& pred,
                  const LengthEstimator& estimator) {
  rec.gt_length = skeleton_length(skeletonize(gt), estimator);
  rec.pred_length = longest_fragment_length(pred, estimator);
  if (rec.gt_length <= 0.0) {
    rec.degenerate_gt = true;
    rec.lar = 0.0;
    return;
  }
  const double e = std::abs(rec.gt_length - rec.pred_length) / rec.gt_length;
  rec.relative_error = e;
  rec.lar = std::max(0.0, 1.0 - e);
}

// Per-image greedy assignment at one threshold: true-positive flag per
// prediction index.
std::vector<char> true_positives(const ImageDetections& img, double iou_threshold) {
  const auto n_gt = img.ious.rows();
  const auto n_pred = static_cast<Eigen::Index>(img.scores.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_pred));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return img.scores[a] > img.scores[b]; });
  std::vector<char> gt_used(static_cast<std::size_t>(n_gt), 0);
  std::vector<char> tp(static_cast<std::size_t>(n_pred), 0);
  for (const auto j : order) {
    Eigen::Index best = -1;
    double best_iou = -1.0;
    for (Eigen::Index i = 0; i < n_gt; ++i) {
      if (!gt_used[i] && img.ious(i, j) > best_iou) {
        best_iou = img.ious(i, j);
        best = i;
      }
    }
    if (best >= 0 && best_iou >= iou_threshold) {
      gt_used[best] = 1;
      tp[j] = 1;
    }
  }
  return tp;
}

struct Cumulative {
  std::vector<std::int64_t> tp;
  std::vector<std::int64_t> fp;
  std::int64_t n_gt = 0;
};

Cumulative accumulate(std::span<const ImageDetections> images, double iou_threshold) {
  struct Entry {
    double score;
    char tp;
  };
  std::vector<Entry> entries;
  Cumulative out;
  for (const auto& img : images) {
    if (img.ious.cols() != static_cast<Eigen::Index>(img.scores.size())) {
      throw Error(ErrorKind::kShape, "IoU matrix columns must match the number of scores");
    }
    out.n_gt += img.ious.rows();
    const auto tp = true_positives(img, iou_threshold);
    for (std::size_t j = 0; j < img.scores.size(); ++j) entries.push_back({img.scores[j], tp[j]});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (const auto& e : entries) {
    (e.tp ? tp : fp) += 1;
    out.tp.push_back(tp);
    out.fp.push_back(fp);
  }
  return out;
}

ImageDetections single_image(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                             std::span<const double> scores, IouKind kind) {
  if (scores.size() != preds.size()) {
    throw Error(ErrorKind::kShape, "one score per prediction is required");
  }
  ImageDetections img;
  img.scores.assign(scores.begin(), scores.end());
  if (kind == IouKind::kMask) {
    img.ious = mask_iou_matrix(gts, preds);
  } else {
    std::vector<PixelBox> gb;
    std::vector<PixelBox> pb;
    for (const auto& m : gts) gb.push_back(bounding_box(m));
    for (const auto& m : preds) pb.push_back(bounding_box(m));
    img.ious = box_iou_matrix(gb, pb);
  }
  return img;
}

// Everything evaluate_dataset needs from one image.
struct ImageOutcome {
  ImageRecords records;
  ImageDetections mask;
  ImageDetections box;
  std::int64_t n_pred = 0;
  std::vector<std::string> diagnostics;
};

ImageOutcome evaluate_image(const ImageInfo& image, const std::vector<const GtInstance*>& gts,
                            const std::vector<const PredInstance*>& preds,
                            const MatchConfig& config) {
  ImageOutcome out;
  out.records.image_id = image.image_id;
  std::vector<BinaryMask> gt_masks;
  std::vector<BinaryMask> pred_masks;
  std::vector<double> scores;
  gt_masks.reserve(gts.size());
  for (const auto* g : gts) gt_masks.push_back(rasterize(g->geometry, image.width, image.height));
  for (const auto* p : preds) {
    if (p->score < config.score_threshold) continue;
    pred_masks.push_back(rasterize(p->geometry, image.width, image.height));
    scores.push_back(p->score);
  }
  out.n_pred = static_cast<std::int64_t>(pred_masks.size());

  const auto gt_boxes = boxes_of(gt_masks);
  const auto pred_boxes = boxes_of(pred_masks);
  const auto gt_areas = areas_of(gt_masks);
  const auto pred_areas = areas_of(pred_masks);
  out.mask.ious = mask_ious(gt_masks, gt_boxes, gt_areas, pred_masks, pred_boxes, pred_areas);
  out.mask.scores = scores;

  auto lar = match_lar(gt_masks, pred_masks, out.mask.ious, config);
  for (std::size_t i = 0; i < lar.records.size(); ++i) {
    auto& rec = lar.records[i];
    rec.gt_id = gts[i]->annotation_id;
    if (rec.degenerate_gt) {
      out.diagnostics.push_back("image " + std::to_string(image.image_id) + ", annotation " +
                                std::to_string(rec.gt_id) +
                                ": ground-truth skeleton has zero length, LAR set to 0");
    }
  }
  out.records.records = std::move(lar.records);

  std::vector<PixelBox> gb;
  std::vector<PixelBox> pb;
  for (const auto& b : gt_boxes) gb.push_back(*b);
  for (const auto& b : pred_boxes) {
    // Predictions with nothing left are never true positives.
    pb.push_back(b.value_or(PixelBox{-2, -2, -2, -2}));
  }
  out.box.ious = box_iou_matrix(gb, pb);
  for (std::size_t j = 0; j < pred_boxes.size(); ++j) {
    if (!pred_boxes[j]) out.box.ious.col(static_cast<Eigen::Index>(j)).setZero();
  }
  out.box.scores = std::move(scores);
  return out;
}

}  // namespace

std::string to_string(MatchingMode mode) {
  switch (mode) {
    case MatchingMode::kPaperOrder: return "paper";
    case MatchingMode::kStrictPaper: return "strict";
    case MatchingMode::kGlobalGreedy: return "greedy";
  }
  return "paper";
}

MatchingMode parse_matching_mode(const std::string& name) {
  if (name == "paper") return MatchingMode::kPaperOrder;
  if (name == "strict") return MatchingMode::kStrictPaper;
  if (name == "greedy") return MatchingMode::kGlobalGreedy;
  throw Error(ErrorKind::kRange, "unknown matching mode '" + name + "' (expected paper, strict or greedy)");
}

std::string to_string(IouKind kind) { return kind == IouKind::kMask ? "mask" : "box"; }

void MatchConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorKind::kRange, "iou threshold must lie in (0, 1]");
  }
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw Error(ErrorKind::kRange, "score threshold must lie in [0, 1]");
  }
  if (const auto* fit = std::get_if<PolylineFit>(&estimator); fit && !(fit->epsilon > 0.0)) {
    throw Error(ErrorKind::kRange, "polyline epsilon must be > 0");
  }
}

const std::array<double, 9>& iou_thresholds() {
  static const std::array<double, 9> thresholds = [] {
    std::array<double, 9> t{};
    for (int k = 0; k < 9; ++k) t[k] = (50 + 5 * k) / 100.0;
    return t;
  }();
  return thresholds;
}

Eigen::MatrixXd mask_iou_matrix(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds) {
  return mask_ious(gts, boxes_of(gts), areas_of(gts), preds, boxes_of(preds), areas_of(preds));
}

Eigen::MatrixXd box_iou_matrix(std::span<const PixelBox> gts, std::span<const PixelBox> preds) {
  Eigen::MatrixXd ious(static_cast<Eigen::Index>(gts.size()), static_cast<Eigen::Index>(preds.size()));
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (std::size_t j = 0; j < preds.size(); ++j) ious(i, j) = iou_box(gts[i], preds[j]);
  }
  return ious;
}

LarResult match_lar(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                    const MatchConfig& config) {
  config.validate();
  return match_lar(gts, preds, mask_iou_matrix(gts, preds), config);
}

LarResult match_lar(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                    const Eigen::MatrixXd& ious, const MatchConfig& config) {
  if (ious.rows() != static_cast<Eigen::Index>(gts.size()) ||
      ious.cols() != static_cast<Eigen::Index>(preds.size())) {
    throw Error(ErrorKind::kShape, "IoU matrix does not match the instance lists");
  }
  const double t = config.iou_threshold;
  const auto n_gt = static_cast<Eigen::Index>(gts.size());
  const auto n_pred = static_cast<Eigen::Index>(preds.size());
  LarResult result;
  result.records.resize(gts.size());
  std::vector<char> available(static_cast<std::size_t>(n_pred), 1);

  // Highest IoU among still-available predictions; lowest index wins ties.
  auto best_available = [&](Eigen::Index i) {
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n_pred; ++j) {
      if (available[j] && (best < 0 || ious(i, j) > ious(i, best))) best = j;
    }
    return best;
  };

  for (Eigen::Index i = 0; i < n_gt; ++i) result.records[i].gt_id = i;

  if (config.mode == MatchingMode::kGlobalGreedy) {
    struct Pair {
      double iou;
      Eigen::Index gt;
      Eigen::Index pred;
    };
    std::vector<Pair> pairs;
    for (Eigen::Index i = 0; i < n_gt; ++i) {
      for (Eigen::Index j = 0; j < n_pred; ++j) {
        if (ious(i, j) >= t) pairs.push_back({ious(i, j), i, j});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
    std::vector<char> gt_done(static_cast<std::size_t>(n_gt), 0);
    for (const auto& p : pairs) {
      if (gt_done[p.gt] || !available[p.pred]) continue;
      gt_done[p.gt] = 1;
      available[p.pred] = 0;
      auto& rec = result.records[p.gt];
      rec.matched_pred_index = static_cast<std::size_t>(p.pred);
      rec.iou = p.iou;
    }
    for (Eigen::Index i = 0; i < n_gt; ++i) {
      auto& rec = result.records[i];
      if (rec.matched()) {
        fill_lengths(rec, gts[i], preds[*rec.matched_pred_index], config.estimator);
      } else if (const auto j = best_available(i); j >= 0) {
        rec.iou = ious(i, j);
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n_gt; ++i) {
      auto& rec = result.records[i];
      const Eigen::Index j = best_available(i);
      if (j < 0) continue;
      rec.iou = ious(i, j);
      if (rec.iou >= t) {
        rec.matched_pred_index = static_cast<std::size_t>(j);
        fill_lengths(rec, gts[i], preds[j], config.estimator);
        available[j] = 0;
      } else if (config.mode == MatchingMode::kStrictPaper && rec.iou > 0.0) {
        // a prediction that does not touch the GT was never "found"
        available[j] = 0;
      }
    }
  }

  double sum = 0.0;
  for (const auto& rec : result.records) sum += rec.lar;
  result.mean_lar = gts.empty() ? 0.0 : sum / static_cast<double>(gts.size());
  return result;
}

std::vector<PrPoint> pr_curve(std::span<const ImageDetections> images, double iou_threshold) {
  const Cumulative c = accumulate(images, iou_threshold);
  std::vector<PrPoint> out;
  for (std::size_t k = 0; k < c.tp.size(); ++k) {
    const double recall =
        c.n_gt > 0 ? static_cast<double>(c.tp[k]) / static_cast<double>(c.n_gt) : 0.0;
    out.push_back({recall, static_cast<double>(c.tp[k]) / static_cast<double>(c.tp[k] + c.fp[k])});
  }
  return out;
}

double average_precision(std::span<const ImageDetections> images, double iou_threshold) {
  const Cumulative c = accumulate(images, iou_threshold);
  if (c.n_gt == 0 || c.tp.empty()) return 0.0;
  const std::size_t n = c.tp.size();
  std::vector<double> envelope(n);
  for (std::size_t k = 0; k < n; ++k) {
    envelope[k] = static_cast<double>(c.tp[k]) / static_cast<double>(c.tp[k] + c.fp[k]);
  }
  for (std::size_t k = n - 1; k > 0; --k) envelope[k - 1] = std::max(envelope[k - 1], envelope[k]);
  double sum = 0.0;
  std::size_t pos = 0;
  for (int r = 0; r < kRecallSteps; ++r) {
    // First point whose recall tp / n_gt reaches r / 100, compared exactly.
    while (pos < n && c.tp[pos] * 100 < static_cast<std::int64_t>(r) * c.n_gt) ++pos;
    if (pos == n) break;
    sum += envelope[pos];
  }
  return sum / kRecallSteps;
}

double average_precision(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                         std::span<const double> scores, double iou_threshold, IouKind kind) {
  const ImageDetections img = single_image(gts, preds, scores, kind);
  return average_precision(std::span<const ImageDetections>(&img, 1), iou_threshold);
}

ApSummary map_summary(std::span<const ImageDetections> images) {
  ApSummary s;
  const auto& thresholds = iou_thresholds();
  double sum = 0.0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    s.ap_by_threshold[k] = average_precision(images, thresholds[k]);
    sum += s.ap_by_threshold[k];
  }
  s.map50 = s.ap_by_threshold[0];
  s.map50_90 = sum / static_cast<double>(thresholds.size());
  return s;
}

ApSummary map_summary(std::span<const BinaryMask> gts, std::span<const BinaryMask> preds,
                      std::span<const double> scores, IouKind kind) {
  const ImageDetections img = single_image(gts, preds, scores, kind);
  return map_summary(std::span<const ImageDetections>(&img, 1));
}

std::vector<std::size_t> mask_nms(std::span<const BinaryMask> preds, std::span<const double> scores,
                                  double overlap_threshold, IouKind level) {
  if (scores.size() != preds.size()) {
    throw Error(ErrorKind::kShape, "one score per prediction is required");
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return scores[a] > scores[b]; });
  const auto boxes = boxes_of(preds);
  const auto areas = areas_of(preds);
  auto overlap = [&](std::size_t a, std::size_t b) {
    if (!boxes[a] || !boxes[b]) return 0.0;
    if (level == IouKind::kBox) return iou_box(*boxes[a], *boxes[b]);
    const std::int64_t inter = intersection_area(preds[a], *boxes[a], preds[b], *boxes[b]);
    return inter == 0 ? 0.0
                      : static_cast<double>(inter) / static_cast<double>(areas[a] + areas[b] - inter);
  };
  std::vector<std::size_t> kept;
  for (const std::size_t cand : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return overlap(k, cand) > overlap_threshold;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

EvaluationReport evaluate_dataset(const DatasetDescriptor& descriptor,
                                  std::span<const GtInstance> gts,
                                  std::span<const PredInstance> preds, const MatchConfig& config,
                                  int threads) {
  config.validate();
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::size_t k = 0; k < descriptor.images.size(); ++k) {
    slot.emplace(descriptor.images[k].image_id, k);
  }
  std::vector<std::vector<const GtInstance*>> gt_by_image(descriptor.images.size());
  std::vector<std::vector<const PredInstance*>> pred_by_image(descriptor.images.size());
  for (const auto& g : gts) {
    const auto it = slot.find(g.image_id);
    if (it == slot.end()) {
      throw Error(ErrorKind::kReference,
                  "annotation references unknown image_id " + std::to_string(g.image_id));
    }
    gt_by_image[it->second].push_back(&g);
  }
  for (const auto& p : preds) {
    const auto it = slot.find(p.image_id);
    if (it == slot.end()) {
      throw Error(ErrorKind::kReference,
                  "prediction references unknown image_id " + std::to_string(p.image_id));
    }
    pred_by_image[it->second].push_back(&p);
  }

  const std::size_t n_images = descriptor.images.size();
  std::vector<ImageOutcome> outcomes(n_images);
  std::vector<std::exception_ptr> failures(n_images);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n_images; k = next++) {
      try {
        outcomes[k] = evaluate_image(descriptor.images[k], gt_by_image[k], pred_by_image[k], config);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, n_images)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  EvaluationReport report;
  report.config = config;
  std::vector<ImageDetections> mask_dets;
  std::vector<ImageDetections> box_dets;
  double lar_sum = 0.0;
  for (auto& o : outcomes) {
    for (const auto& rec : o.records.records) {
      lar_sum += rec.lar;
      ++report.n_gt;
      if (rec.matched()) ++report.n_matched;
    }
    report.n_pred += o.n_pred;
    report.diagnostics.insert(report.diagnostics.end(), o.diagnostics.begin(), o.diagnostics.end());
    report.images.push_back(std::move(o.records));
    mask_dets.push_back(std::move(o.mask));
    box_dets.push_back(std::move(o.box));
  }
  report.mean_lar = report.n_gt > 0 ? lar_sum / static_cast<double>(report.n_gt) : 0.0;
  report.mask = map_summary(mask_dets);
  report.box = map_summary(box_dets);
  if (report.n_gt == 0) {
    report.diagnostics.push_back(report.n_pred > 0
                                     ? "no ground truth instances: AP and LAR are defined as 0"
                                     : "no ground truth and no predictions: AP and LAR are defined as 0");
  }
  return report;
}

}  // namespace lareval
