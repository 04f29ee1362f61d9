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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace judgebias {

/// Answer labels of one dimension, ordered worst to best. Position k (1-based)
/// is the Likert level k.
struct LabelMap {
  std::string dimension_id;
  std::vector<std::string> ordered_labels;
  std::set<std::string> na_labels;
};

std::map<std::string, LabelMap> load_label_maps(const std::string& path);
std::map<std::string, LabelMap> parse_label_maps_json(const std::string& json_text);

struct ParsedResponse {
  std::string label;          // matched label, canonical casing from the map
  std::optional<int> level;   // 1-based position; empty for NA labels
  std::string explanation;    // text preceding the final answer marker
};

/// Extract the answer after the last "Answer:" marker and match it against
/// the dimension's labels. Matching lowercases, strips surrounding brackets
/// and trailing punctuation, and collapses whitespace. With strict=false a
/// near miss (edit distance <= 2) is accepted; by default it is an error
/// carrying the nearest label as a suggestion.
ParsedResponse parse_judge_response(const std::string& text, const std::string& dimension_id,
                                    const std::map<std::string, LabelMap>& maps,
                                    bool strict = true);

/// One raw judge transcript with its identifiers.
struct JudgmentRecord {
  std::string prompt_id;
  std::string dimension_id;
  std::string model_id;
  std::string judge_id;
  std::string response_text;
};

/// Read line-delimited JSON records {prompt_id, dimension, model, judge,
/// response_text}.
std::vector<JudgmentRecord> load_judgment_records(const std::string& path);

struct ParsedJudgment {
  JudgmentRecord record;
  ParsedResponse response;
};

/// Turn parsed responses into llm_judge rating rows. NA levels become missing
/// values; duplicate (prompt, dimension, model, judge) keys are an error.
std::vector<RatingRow> labels_to_rows(const std::vector<ParsedJudgment>& judgments,
                                      const std::map<std::string, ScaleDef>& scales);

}  // namespace judgebias
