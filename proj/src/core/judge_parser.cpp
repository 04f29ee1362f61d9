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

#include "core/judge_parser.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/io.hpp"

namespace judgebias {

namespace {

constexpr const char* kModule = "judge_parser";
constexpr const char* kMarker = "answer:";

/// Lowercase, strip surrounding brackets and trailing periods/commas, and
/// collapse whitespace runs to single spaces.
std::string normalize_answer(const std::string& raw) {
  std::string s = trim(lowercase(raw));
  while (!s.empty() && (s.front() == '[' || s.front() == '(')) s.erase(s.begin());
  while (!s.empty() &&
         (s.back() == ']' || s.back() == ')' || s.back() == '.' || s.back() == ','))
    s.pop_back();
  s = trim(s);
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += c;
  }
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t find_last_marker(const std::string& lowered) {
  std::size_t pos = std::string::npos;
  std::size_t at = lowered.find(kMarker);
  while (at != std::string::npos) {
    pos = at;
    at = lowered.find(kMarker, at + 1);
  }
  return pos;
}

}  // namespace

std::map<std::string, LabelMap> parse_label_maps_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(kModule, std::string("label map file is not valid JSON: ") + e.what());
  }
  std::map<std::string, LabelMap> out;
  for (const auto& [dim, entry] : j.items()) {
    LabelMap m;
    m.dimension_id = dim;
    try {
      m.ordered_labels = entry.at("ordered_labels").get<std::vector<std::string>>();
      if (entry.contains("na_labels"))
        for (const auto& l : entry.at("na_labels"))
          m.na_labels.insert(normalize_answer(l.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      fail(kModule, "bad label map for '" + dim + "': " + e.what());
    }
    if (m.ordered_labels.size() < 2) fail(kModule, "label map '" + dim + "' needs >= 2 labels");
    std::set<std::string> seen;
    for (const auto& l : m.ordered_labels)
      if (!seen.insert(normalize_answer(l)).second)
        fail(kModule, "duplicate label '" + l + "' in map '" + dim + "'");
    out[dim] = std::move(m);
  }
  return out;
}

std::map<std::string, LabelMap> load_label_maps(const std::string& path) {
  return parse_label_maps_json(read_file(path));
}

ParsedResponse parse_judge_response(const std::string& text, const std::string& dimension_id,
                                    const std::map<std::string, LabelMap>& maps, bool strict) {
  const auto mit = maps.find(dimension_id);
  if (mit == maps.end()) fail(kModule, "no label map for dimension '" + dimension_id + "'");
  const LabelMap& map = mit->second;

  const std::string lowered = lowercase(text);
  const std::size_t marker = find_last_marker(lowered);
  if (marker == std::string::npos) fail(kModule, "missing Answer marker in response");

  ParsedResponse out;
  std::string expl = text.substr(0, marker);
  // Trim a trailing separator and the leading "Explanation:" tag; the body in
  // between is preserved as written.
  while (!expl.empty() && (expl.back() == ' ' || expl.back() == ',' || expl.back() == '\n' ||
                           expl.back() == '\r' || expl.back() == '\t'))
    expl.pop_back();
  const std::string expl_tag = "explanation:";
  if (lowercase(expl).rfind(expl_tag, 0) == 0) expl = trim(expl.substr(expl_tag.size()));
  out.explanation = expl;

  const std::string answer = normalize_answer(text.substr(marker + std::string(kMarker).size()));
  if (answer.empty()) fail(kModule, "empty answer after Answer marker");

  if (map.na_labels.count(answer)) {
    out.label = answer;
    return out;  // NA: no level
  }
  for (std::size_t k = 0; k < map.ordered_labels.size(); ++k) {
    if (normalize_answer(map.ordered_labels[k]) == answer) {
      out.label = map.ordered_labels[k];
      out.level = static_cast<int>(k + 1);
      return out;
    }
  }

  // No exact match: find the nearest label for the suggestion / fuzzy accept.
  std::size_t best = std::string::npos;
  std::size_t best_dist = 0;
  for (std::size_t k = 0; k < map.ordered_labels.size(); ++k) {
    const std::size_t d = edit_distance(normalize_answer(map.ordered_labels[k]), answer);
    if (best == std::string::npos || d < best_dist) {
      best = k;
      best_dist = d;
    }
  }
  if (!strict && best != std::string::npos && best_dist <= 2) {
    out.label = map.ordered_labels[best];
    out.level = static_cast<int>(best + 1);
    return out;
  }
  fail(kModule, "answer '" + answer + "' matches no label for '" + dimension_id +
                    "' (nearest: '" + map.ordered_labels[best] + "')");
}

std::vector<JudgmentRecord> load_judgment_records(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<JudgmentRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
      JudgmentRecord r;
      r.prompt_id = j.at("prompt_id").get<std::string>();
      r.dimension_id = j.at("dimension").get<std::string>();
      r.model_id = j.at("model").get<std::string>();
      r.judge_id = j.at("judge").get<std::string>();
      r.response_text = j.at("response_text").get<std::string>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(kModule, "bad judgment record (line " + std::to_string(line_no) + "): " + e.what());
    }
  }
  return out;
}

std::vector<RatingRow> labels_to_rows(const std::vector<ParsedJudgment>& judgments,
                                      const std::map<std::string, ScaleDef>& scales) {
  std::set<RowKey> seen;
  std::vector<RatingRow> rows;
  rows.reserve(judgments.size());
  for (const auto& pj : judgments) {
    const RowKey key{pj.record.prompt_id, pj.record.dimension_id, pj.record.model_id,
                     pj.record.judge_id};
    if (!seen.insert(key).second)
      fail(kModule, "duplicate judgment for (" + key.prompt_id + ", " + key.dimension_id + ", " +
                        key.model_id + ", " + key.judge_id + ")");
    RatingRow r;
    r.prompt_id = pj.record.prompt_id;
    r.dimension_id = pj.record.dimension_id;
    r.model_id = pj.record.model_id;
    r.rater_id = pj.record.judge_id;
    r.rater_kind = RaterKind::llm_judge;
    if (pj.response.level) {
      const auto sit = scales.find(r.dimension_id);
      if (sit == scales.end()) fail(kModule, "no scale for dimension '" + r.dimension_id + "'");
      if (*pj.response.level > sit->second.num_levels)
        fail(kModule, "label map level " + std::to_string(*pj.response.level) +
                          " exceeds scale of '" + r.dimension_id + "'");
      r.raw_level = pj.response.level;
      r.value = normalize_score(*r.raw_level, sit->second);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace judgebias
