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

#include <string>
#include <string_view>

#include "lareval/metrics.hpp"

namespace lareval {

inline constexpr int kReportSchemaVersion = 1;

/// Versioned JSON report. `generated_at` is the only field that may differ
/// between two runs on identical inputs.
std::string report_to_json(const EvaluationReport& report, std::string_view generated_at);

/// One row per ground-truth instance:
/// image_id,gt_id,matched,iou,gt_length,pred_length,e_i,lar_i
std::string report_to_csv(const EvaluationReport& report);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace lareval
