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
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/types.hpp"

namespace testing {

inline judgebias::ScaleDef scale(const std::string& dim, int k) {
  judgebias::ScaleDef s;
  s.dimension_id = dim;
  s.num_levels = k;
  s.na_labels = {"na"};
  return s;
}

inline judgebias::ModelConfig two_model_config() {
  judgebias::ModelConfig c;
  c.models = {"alpha", "bravo"};
  c.judges = {"alpha"};
  c.family_of = {{"alpha", "fam-a"}, {"bravo", "fam-b"}};
  return c;
}

inline judgebias::RatingRow judge_row(const std::string& prompt, const std::string& dim,
                                      const std::string& model, const std::string& judge,
                                      double value,
                                      std::optional<long> token_length = std::nullopt) {
  judgebias::RatingRow r;
  r.prompt_id = prompt;
  r.dimension_id = dim;
  r.model_id = model;
  r.rater_id = judge;
  r.rater_kind = judgebias::RaterKind::llm_judge;
  r.value = value;
  r.token_length = token_length;
  return r;
}

inline judgebias::RatingRow human_row(const std::string& prompt, const std::string& dim,
                                      const std::string& model, const std::string& rater,
                                      std::optional<int> level, int k) {
  judgebias::RatingRow r;
  r.prompt_id = prompt;
  r.dimension_id = dim;
  r.model_id = model;
  r.rater_id = rater;
  r.rater_kind = judgebias::RaterKind::human;
  if (level) {
    r.raw_level = level;
    r.value = judgebias::normalize_score(*level, scale(dim, k));
  }
  return r;
}

inline std::string data_path(const std::string& rel) {
  return std::string(JUDGEBIAS_TEST_DATA) + "/" + rel;
}

}  // namespace testing
