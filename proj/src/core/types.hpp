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

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace judgebias {

/// Likert scale of a rating dimension: K points mapped onto [0, 1].
struct ScaleDef {
  std::string dimension_id;
  int num_levels = 0;                // K >= 2
  std::set<std::string> na_labels;   // lowercased labels meaning "missing"
};

/// Judge/model identities and the family map F(.), plus prompt metadata.
struct ModelConfig {
  std::vector<std::string> models;  // m = 1..M, in canonical order
  std::vector<std::string> judges;  // j = 1..J, in canonical order
  std::map<std::string, std::string> family_of;  // model-or-judge id -> family
  std::map<std::string, std::string> task_of;    // prompt id -> task type
  std::map<std::string, std::string> source_of;  // prompt id -> source dataset

  bool has_model(const std::string& id) const;
  bool has_judge(const std::string& id) const;
  const std::string& family(const std::string& id) const;  // throws on unknown id
  /// Judges that also appear in the model list (the overlap set).
  std::vector<std::string> overlap_judges() const;
};

enum class RaterKind { llm_judge, human };

const char* to_string(RaterKind k);
RaterKind rater_kind_from_string(const std::string& s);

/// One observation: rater's score of model m's completion of prompt i on
/// dimension d. Either a raw Likert level (with its normalized value) or a
/// continuous value (synthetic / debiased data), or neither (NA).
struct RatingRow {
  std::string prompt_id;
  std::string dimension_id;
  std::string model_id;
  std::string rater_id;
  RaterKind rater_kind = RaterKind::human;
  std::optional<int> raw_level;        // 1..K when present
  std::optional<double> value;         // normalized / continuous score
  std::optional<long> token_length;    // completion length, if known

  bool is_na() const { return !value.has_value(); }
};

/// (prompt, dimension, model) cell identifying one completion-dimension pair.
struct CellKey {
  std::string prompt_id;
  std::string dimension_id;
  std::string model_id;

  auto operator<=>(const CellKey&) const = default;
};

/// (prompt, dimension, model, judge) key of one fitted observation.
struct RowKey {
  std::string prompt_id;
  std::string dimension_id;
  std::string model_id;
  std::string judge_id;

  auto operator<=>(const RowKey&) const = default;
};

/// Immutable-after-construction ratings store. Rows are kept sorted by
/// (prompt, dimension, model, rater) so all downstream computations are
/// independent of input order.
struct RatingsTable {
  std::vector<RatingRow> rows;
  std::map<std::string, ScaleDef> scales;
  ModelConfig config;
  std::map<CellKey, double> reference;  // S_idm in [0, 1]

  // Flags populated by aggregate_reference / lofo_reference.
  std::set<CellKey> cells_without_reference;
  std::set<CellKey> cells_with_single_annotator;

  std::set<std::string> prompt_ids() const;
  std::set<std::string> dimension_ids() const;  // dimensions present in rows
  long count_rows(RaterKind kind) const;
};

}  // namespace judgebias
