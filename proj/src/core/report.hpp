// Copyright 2026 The judgebias Authors.
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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/analyses.hpp"

namespace judgebias {

/// The result of one analysis run, in a form the C API can hand out and the
/// CLI can serialize. Exactly one payload is set, per `kind`.
struct Report {
  enum class Kind { bias, agreement, correlation, heatmap };

  Kind kind = Kind::bias;
  std::vector<BiasReport> bias;  // one or more slices
  std::optional<AgreementReport> agreement;
  std::optional<CorrelationReport> correlation;
  std::optional<HeatmapTable> heatmap;

  nlohmann::json to_json() const;
  /// Flat table for plotting; layout depends on the kind. For bias reports:
  /// slice,judge_or_family,kind,estimate,se,lower,upper,reject_zero,n.
  std::string to_csv() const;
};

nlohmann::json wald_to_json(const WaldInterval& w);
nlohmann::json bias_report_to_json(const BiasReport& r);
nlohmann::json agreement_report_to_json(const AgreementReport& r);
nlohmann::json correlation_report_to_json(const CorrelationReport& r);
nlohmann::json heatmap_to_json(const HeatmapTable& h);

/// Tidy estimate rows for any number of bias reports (header-only when empty).
std::string bias_plotdata_csv(const std::vector<BiasReport>& reports);

/// Matrix CSV of the mean scores; models as columns, judges + human as rows.
std::string heatmap_csv(const HeatmapTable& h, bool row_normalized);

void write_report_json(const Report& report, const std::string& path);
void write_report_csv(const Report& report, const std::string& path);

}  // namespace judgebias
