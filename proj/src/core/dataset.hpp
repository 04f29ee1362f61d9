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

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace judgebias {

/// Contents of a dataset config file: identities, families, scales, prompt
/// metadata.
struct DatasetConfig {
  ModelConfig config;
  std::map<std::string, ScaleDef> scales;
};

DatasetConfig load_config(const std::string& path);
DatasetConfig parse_config_json(const std::string& json_text);

/// Serialize identities, families and scales back into the config schema.
std::string config_to_json(const ModelConfig& config,
                           const std::map<std::string, ScaleDef>& scales);

/// Map level k of a K-point scale to (k-1)/(K-1) in [0, 1].
double normalize_score(int raw_level, const ScaleDef& scale);

/// Build a validated table from rows. Sorts rows into canonical order,
/// rejects duplicate (prompt, dimension, model, rater) keys, checks levels
/// against scales and ids against the config.
RatingsTable make_table(std::vector<RatingRow> rows,
                        std::map<std::string, ScaleDef> scales, ModelConfig config);

/// Read a CSV/TSV rating file with header
/// prompt_id,dimension,model,rater,rater_kind,level,token_length[,score].
RatingsTable load_ratings(const std::string& path,
                          const std::map<std::string, ScaleDef>& scales,
                          const ModelConfig& config);
RatingsTable parse_ratings_csv(std::istream& in, const std::string& origin,
                               const std::map<std::string, ScaleDef>& scales,
                               const ModelConfig& config);

/// Fill the reference map with the per-cell mean of non-NA human scores.
/// Cells whose human ratings are all NA are flagged, not fatal; cells backed
/// by a single annotator are flagged for reporting.
RatingsTable aggregate_reference(RatingsTable table);

struct FilterSpec {
  std::optional<std::set<std::string>> dimensions;   // keep only these
  std::optional<std::set<std::string>> task_types;   // keep only these tasks
  std::set<std::string> drop_models;                 // remove these completions
  std::set<std::string> drop_judges;                 // remove these judges' rows
};

/// New table with matching rows removed/kept; config lists and reference map
/// restricted accordingly. Unknown ids in the spec are an error.
RatingsTable filter_table(const RatingsTable& table, const FilterSpec& spec);

/// Canonical export: fixed header, sorted rows, shortest round-trip numbers.
/// Reloading the exported bytes reproduces the table exactly.
void write_ratings_csv(const RatingsTable& table, std::ostream& out);
std::string canonical_csv(const RatingsTable& table);
void write_ratings_csv_file(const RatingsTable& table, const std::string& path);

}  // namespace judgebias
