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

#include "lareval/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "json.hpp"

namespace lareval {
namespace {

using nlohmann::ordered_json;

std::string threshold_key(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

ordered_json summary_json(const ApSummary& s) {
  ordered_json by_threshold;
  const auto& thresholds = iou_thresholds();
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    by_threshold[threshold_key(thresholds[k])] = s.ap_by_threshold[k];
  }
  return {{"ap_by_threshold", by_threshold}, {"map50", s.map50}, {"map50_90", s.map50_90}};
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report, std::string_view generated_at) {
  ordered_json doc;
  doc["schema"] = "lareval.evaluation";
  doc["schema_version"] = kReportSchemaVersion;
  doc["generated_at"] = std::string(generated_at);

  ordered_json config;
  config["iou_threshold"] = report.config.iou_threshold;
  config["matching_mode"] = to_string(report.config.mode);
  config["estimator"] = estimator_name(report.config.estimator);
  if (const auto* fit = std::get_if<PolylineFit>(&report.config.estimator)) {
    config["polyline_epsilon"] = fit->epsilon;
  }
  config["score_threshold"] = report.config.score_threshold;
  doc["config"] = config;

  doc["counts"] = {{"n_gt", report.n_gt}, {"n_pred", report.n_pred}, {"n_matched", report.n_matched}};
  doc["mean_lar"] = report.mean_lar;
  doc["map50"] = report.mask.map50;
  doc["map50_90"] = report.mask.map50_90;
  doc["mask"] = summary_json(report.mask);
  doc["box"] = summary_json(report.box);

  ordered_json images = ordered_json::array();
  for (const auto& img : report.images) {
    ordered_json records = ordered_json::array();
    for (const auto& r : img.records) {
      ordered_json rec;
      rec["gt_id"] = r.gt_id;
      rec["matched_pred_index"] =
          r.matched_pred_index ? ordered_json(*r.matched_pred_index) : ordered_json(nullptr);
      rec["iou"] = r.iou;
      rec["gt_length"] = r.gt_length;
      rec["pred_length"] = r.pred_length;
      rec["relative_error"] =
          r.relative_error ? ordered_json(*r.relative_error) : ordered_json(nullptr);
      rec["lar"] = r.lar;
      if (r.degenerate_gt) rec["degenerate_gt"] = true;
      records.push_back(std::move(rec));
    }
    images.push_back({{"image_id", img.image_id}, {"records", std::move(records)}});
  }
  doc["images"] = std::move(images);
  doc["diagnostics"] = report.diagnostics;
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const EvaluationReport& report) {
  std::string out = "image_id,gt_id,matched,iou,gt_length,pred_length,e_i,lar_i\n";
  for (const auto& img : report.images) {
    for (const auto& r : img.records) {
      out += std::to_string(img.image_id) + ',' + std::to_string(r.gt_id) + ',' +
             (r.matched() ? "1" : "0") + ',' + number(r.iou) + ',' + number(r.gt_length) + ',' +
             number(r.pred_length) + ',' + (r.relative_error ? number(*r.relative_error) : "") +
             ',' + number(r.lar) + '\n';
    }
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace lareval
