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

#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/numeric.hpp"

namespace judgebias {

namespace {

constexpr const char* kModule = "dataset";

const char* kHeader[] = {"prompt_id", "dimension", "model", "rater",
                         "rater_kind", "level", "token_length", "score"};
constexpr int kRequiredColumns = 7;

struct RowSortKey {
  bool operator()(const RatingRow& a, const RatingRow& b) const {
    return std::tie(a.prompt_id, a.dimension_id, a.model_id, a.rater_id) <
           std::tie(b.prompt_id, b.dimension_id, b.model_id, b.rater_id);
  }
};

long parse_integer(const std::string& s, const std::string& what, int line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(kModule, "malformed " + what + " '" + s + "' (line " + std::to_string(line_no) + ")");
  return v;
}

double parse_real(const std::string& s, const std::string& what, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(kModule, "malformed " + what + " '" + s + "' (line " + std::to_string(line_no) + ")");
  }
}

}  // namespace

bool ModelConfig::has_model(const std::string& id) const {
  return std::find(models.begin(), models.end(), id) != models.end();
}

bool ModelConfig::has_judge(const std::string& id) const {
  return std::find(judges.begin(), judges.end(), id) != judges.end();
}

const std::string& ModelConfig::family(const std::string& id) const {
  const auto it = family_of.find(id);
  if (it == family_of.end()) fail(kModule, "no family for id '" + id + "'");
  return it->second;
}

std::vector<std::string> ModelConfig::overlap_judges() const {
  std::vector<std::string> out;
  for (const auto& j : judges)
    if (has_model(j)) out.push_back(j);
  return out;
}

const char* to_string(RaterKind k) {
  return k == RaterKind::llm_judge ? "llm_judge" : "human";
}

RaterKind rater_kind_from_string(const std::string& s) {
  if (s == "llm_judge") return RaterKind::llm_judge;
  if (s == "human") return RaterKind::human;
  fail(kModule, "unknown rater_kind '" + s + "'");
}

std::set<std::string> RatingsTable::prompt_ids() const {
  std::set<std::string> out;
  for (const auto& r : rows) out.insert(r.prompt_id);
  return out;
}

std::set<std::string> RatingsTable::dimension_ids() const {
  std::set<std::string> out;
  for (const auto& r : rows) out.insert(r.dimension_id);
  return out;
}

long RatingsTable::count_rows(RaterKind kind) const {
  long n = 0;
  for (const auto& r : rows)
    if (r.rater_kind == kind) ++n;
  return n;
}

double normalize_score(int raw_level, const ScaleDef& scale) {
  if (scale.num_levels < 2) fail(kModule, "scale '" + scale.dimension_id + "' has fewer than 2 levels");
  if (raw_level < 1 || raw_level > scale.num_levels)
    fail(kModule, "level out of range: " + std::to_string(raw_level) + " on " +
                      std::to_string(scale.num_levels) + "-point scale '" + scale.dimension_id + "'");
  return static_cast<double>(raw_level - 1) / static_cast<double>(scale.num_levels - 1);
}

DatasetConfig parse_config_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(kModule, std::string("config is not valid JSON: ") + e.what());
  }
  DatasetConfig out;
  try {
    out.config.models = j.at("models").get<std::vector<std::string>>();
    out.config.judges = j.at("judges").get<std::vector<std::string>>();
    for (const auto& [id, fam] : j.at("families").items())
      out.config.family_of[id] = fam.get<std::string>();
    for (const auto& [dim, sj] : j.at("scales").items()) {
      ScaleDef s;
      s.dimension_id = dim;
      s.num_levels = sj.at("num_levels").get<int>();
      if (s.num_levels < 2) fail(kModule, "scale '" + dim + "' must have num_levels >= 2");
      s.na_labels = {"na"};
      if (sj.contains("na_labels"))
        for (const auto& l : sj.at("na_labels")) s.na_labels.insert(lowercase(l.get<std::string>()));
      out.scales[dim] = std::move(s);
    }
    if (j.contains("tasks"))
      for (const auto& [p, t] : j.at("tasks").items()) out.config.task_of[p] = t.get<std::string>();
    if (j.contains("sources"))
      for (const auto& [p, s] : j.at("sources").items()) out.config.source_of[p] = s.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(kModule, std::string("bad config structure: ") + e.what());
  }
  if (out.config.models.empty()) fail(kModule, "config has no models");
  if (out.config.judges.empty()) fail(kModule, "config has no judges");
  for (const auto& id : out.config.models)
    if (!out.config.family_of.count(id)) fail(kModule, "model '" + id + "' has no family");
  for (const auto& id : out.config.judges)
    if (!out.config.family_of.count(id)) fail(kModule, "judge '" + id + "' has no family");
  return out;
}

DatasetConfig load_config(const std::string& path) {
  return parse_config_json(read_file(path));
}

std::string config_to_json(const ModelConfig& config,
                           const std::map<std::string, ScaleDef>& scales) {
  nlohmann::json j;
  j["models"] = config.models;
  j["judges"] = config.judges;
  j["families"] = config.family_of;
  nlohmann::json sc = nlohmann::json::object();
  for (const auto& [dim, s] : scales) {
    sc[dim] = {{"num_levels", s.num_levels},
               {"na_labels", std::vector<std::string>(s.na_labels.begin(), s.na_labels.end())}};
  }
  j["scales"] = sc;
  if (!config.task_of.empty()) j["tasks"] = config.task_of;
  if (!config.source_of.empty()) j["sources"] = config.source_of;
  return j.dump(2) + "\n";
}

RatingsTable make_table(std::vector<RatingRow> rows,
                        std::map<std::string, ScaleDef> scales, ModelConfig config) {
  RatingsTable t;
  t.scales = std::move(scales);
  t.config = std::move(config);

  std::sort(rows.begin(), rows.end(), RowSortKey{});
  std::map<std::pair<std::string, std::string>, long> lengths;  // (prompt, model) -> token_length
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!t.scales.count(r.dimension_id)) fail(kModule, "unknown dimension '" + r.dimension_id + "'");
    if (!t.config.has_model(r.model_id)) fail(kModule, "unknown model '" + r.model_id + "'");
    if (r.rater_kind == RaterKind::llm_judge && !t.config.has_judge(r.rater_id))
      fail(kModule, "llm_judge rater '" + r.rater_id + "' is not in the judge list");
    if (r.raw_level) {
      const auto& scale = t.scales.at(r.dimension_id);
      const double v = normalize_score(*r.raw_level, scale);
      if (!r.value || std::abs(*r.value - v) > 1e-9)
        rows[i].value = v;
    }
    if (r.rater_kind == RaterKind::human && r.value && (*r.value < 0.0 || *r.value > 1.0))
      fail(kModule, "human score outside [0,1] for prompt '" + r.prompt_id + "'");
    if (r.token_length) {
      if (*r.token_length < 0) fail(kModule, "negative token_length for prompt '" + r.prompt_id + "'");
      const auto key = std::make_pair(r.prompt_id, r.model_id);
      const auto it = lengths.find(key);
      if (it == lengths.end())
        lengths.emplace(key, *r.token_length);
      else if (it->second != *r.token_length)
        fail(kModule, "inconsistent token_length for (" + r.prompt_id + ", " + r.model_id + ")");
    }
    if (i > 0) {
      const auto& prev = rows[i - 1];
      if (std::tie(prev.prompt_id, prev.dimension_id, prev.model_id, prev.rater_id) ==
          std::tie(r.prompt_id, r.dimension_id, r.model_id, r.rater_id))
        fail(kModule, "duplicate key (" + r.prompt_id + ", " + r.dimension_id + ", " +
                          r.model_id + ", " + r.rater_id + ")");
    }
  }
  t.rows = std::move(rows);
  return t;
}

RatingsTable parse_ratings_csv(std::istream& in, const std::string& origin,
                               const std::map<std::string, ScaleDef>& scales,
                               const ModelConfig& config) {
  std::string line;
  if (!std::getline(in, line)) fail(kModule, "empty rating file: " + origin);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split_csv_record(line, delim);
  std::map<std::string, int> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = static_cast<int>(i);
  for (int i = 0; i < kRequiredColumns; ++i)
    if (!col.count(kHeader[i]))
      fail(kModule, std::string("missing column '") + kHeader[i] + "' in " + origin);
  const bool has_score = col.count("score") > 0;

  std::vector<RatingRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_record(line, delim);
    if (f.size() != header.size())
      fail(kModule, "malformed row: expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(f.size()) + " (line " + std::to_string(line_no) + ")");
    RatingRow r;
    r.prompt_id = f[col.at("prompt_id")];
    r.dimension_id = f[col.at("dimension")];
    r.model_id = f[col.at("model")];
    r.rater_id = f[col.at("rater")];
    if (r.prompt_id.empty() || r.dimension_id.empty() || r.model_id.empty() || r.rater_id.empty())
      fail(kModule, "malformed row: empty id field (line " + std::to_string(line_no) + ")");
    try {
      r.rater_kind = rater_kind_from_string(f[col.at("rater_kind")]);
    } catch (const Error&) {
      fail(kModule, "malformed rater_kind '" + f[col.at("rater_kind")] + "' (line " +
                        std::to_string(line_no) + ")");
    }

    const auto sit = scales.find(r.dimension_id);
    if (sit == scales.end())
      fail(kModule, "unknown dimension '" + r.dimension_id + "' (line " + std::to_string(line_no) + ")");
    const ScaleDef& scale = sit->second;

    const std::string level_str = trim(f[col.at("level")]);
    const bool level_is_na = level_str.empty() || scale.na_labels.count(lowercase(level_str)) > 0;
    if (!level_is_na) {
      const long lv = parse_integer(level_str, "level", line_no);
      if (lv < 1 || lv > scale.num_levels)
        fail(kModule, "level out of range: " + level_str + " on " +
                          std::to_string(scale.num_levels) + "-point scale '" + r.dimension_id +
                          "' (line " + std::to_string(line_no) + ")");
      r.raw_level = static_cast<int>(lv);
      r.value = normalize_score(r.raw_level.value(), scale);
    }

    const std::string len_str = trim(f[col.at("token_length")]);
    if (!len_str.empty()) {
      const long len = parse_integer(len_str, "token_length", line_no);
      if (len < 0) fail(kModule, "negative token_length (line " + std::to_string(line_no) + ")");
      r.token_length = len;
    }

    if (has_score) {
      const std::string score_str = trim(f[col.at("score")]);
      if (!score_str.empty()) {
        const double s = parse_real(score_str, "score", line_no);
        if (r.raw_level) {
          if (std::abs(s - *r.value) > 1e-9)
            fail(kModule, "score does not match normalized level (line " + std::to_string(line_no) + ")");
        } else {
          r.value = s;
        }
      }
    }
    rows.push_back(std::move(r));
  }
  return make_table(std::move(rows), scales, config);
}

RatingsTable load_ratings(const std::string& path,
                          const std::map<std::string, ScaleDef>& scales,
                          const ModelConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kModule, "cannot open rating file: " + path);
  return parse_ratings_csv(in, path, scales, config);
}

RatingsTable aggregate_reference(RatingsTable table) {
  table.reference.clear();
  table.cells_without_reference.clear();
  table.cells_with_single_annotator.clear();

  std::map<CellKey, std::pair<double, long>> acc;  // cell -> (sum, count)
  std::set<CellKey> seen;
  for (const auto& r : table.rows) {
    if (r.rater_kind != RaterKind::human) continue;
    const CellKey key{r.prompt_id, r.dimension_id, r.model_id};
    seen.insert(key);
    if (r.value) {
      auto& a = acc[key];
      a.first += *r.value;
      a.second += 1;
    }
  }
  for (const auto& key : seen) {
    const auto it = acc.find(key);
    if (it == acc.end()) {
      table.cells_without_reference.insert(key);
      continue;
    }
    table.reference[key] = it->second.first / static_cast<double>(it->second.second);
    if (it->second.second < 2) table.cells_with_single_annotator.insert(key);
  }
  return table;
}

RatingsTable filter_table(const RatingsTable& table, const FilterSpec& spec) {
  if (spec.dimensions)
    for (const auto& d : *spec.dimensions)
      if (!table.scales.count(d)) fail(kModule, "unknown dimension in filter: '" + d + "'");
  if (spec.task_types) {
    std::set<std::string> known;
    for (const auto& [p, t] : table.config.task_of) known.insert(t);
    for (const auto& t : *spec.task_types)
      if (!known.count(t)) fail(kModule, "unknown task type in filter: '" + t + "'");
  }
  for (const auto& m : spec.drop_models)
    if (!table.config.has_model(m)) fail(kModule, "unknown model in filter: '" + m + "'");
  for (const auto& j : spec.drop_judges)
    if (!table.config.has_judge(j)) fail(kModule, "unknown judge in filter: '" + j + "'");

  const auto keep_row = [&](const RatingRow& r) {
    if (spec.dimensions && !spec.dimensions->count(r.dimension_id)) return false;
    if (spec.task_types) {
      const auto it = table.config.task_of.find(r.prompt_id);
      if (it == table.config.task_of.end() || !spec.task_types->count(it->second)) return false;
    }
    if (spec.drop_models.count(r.model_id)) return false;
    if (r.rater_kind == RaterKind::llm_judge && spec.drop_judges.count(r.rater_id)) return false;
    return true;
  };

  RatingsTable out;
  for (const auto& r : table.rows)
    if (keep_row(r)) out.rows.push_back(r);

  out.config = table.config;
  std::erase_if(out.config.models, [&](const std::string& m) { return spec.drop_models.count(m) > 0; });
  std::erase_if(out.config.judges, [&](const std::string& j) { return spec.drop_judges.count(j) > 0; });

  for (const auto& [dim, scale] : table.scales)
    if (!spec.dimensions || spec.dimensions->count(dim)) out.scales[dim] = scale;

  const auto keep_cell = [&](const CellKey& c) {
    if (spec.dimensions && !spec.dimensions->count(c.dimension_id)) return false;
    if (spec.task_types) {
      const auto it = table.config.task_of.find(c.prompt_id);
      if (it == table.config.task_of.end() || !spec.task_types->count(it->second)) return false;
    }
    return spec.drop_models.count(c.model_id) == 0;
  };
  for (const auto& [cell, s] : table.reference)
    if (keep_cell(cell)) out.reference[cell] = s;
  for (const auto& cell : table.cells_without_reference)
    if (keep_cell(cell)) out.cells_without_reference.insert(cell);
  for (const auto& cell : table.cells_with_single_annotator)
    if (keep_cell(cell)) out.cells_with_single_annotator.insert(cell);
  return out;
}

void write_ratings_csv(const RatingsTable& table, std::ostream& out) {
  for (int i = 0; i < 8; ++i) out << (i ? "," : "") << kHeader[i];
  out << "\n";
  for (const auto& r : table.rows) {
    out << csv_quote(r.prompt_id, ',') << ',' << csv_quote(r.dimension_id, ',') << ','
        << csv_quote(r.model_id, ',') << ',' << csv_quote(r.rater_id, ',') << ','
        << to_string(r.rater_kind) << ',';
    if (r.raw_level) out << *r.raw_level;
    out << ',';
    if (r.token_length) out << *r.token_length;
    out << ',';
    if (r.value) out << format_double(*r.value);
    out << "\n";
  }
}

std::string canonical_csv(const RatingsTable& table) {
  std::ostringstream out;
  write_ratings_csv(table, out);
  return out.str();
}

void write_ratings_csv_file(const RatingsTable& table, const std::string& path) {
  atomic_write_file(path, canonical_csv(table));
}

}  // namespace judgebias
