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

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "helpers.hpp"

using namespace judgebias;

namespace {

RatingsTable load_fixture() {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  return load_ratings(testing::data_path("fixtures/ratings54.csv"), cfg.scales, cfg.config);
}

}  // namespace

TEST_CASE("normalize_score maps levels onto [0,1]") {
  CHECK(normalize_score(3, testing::scale("d", 5)) == doctest::Approx(0.5));
  CHECK(normalize_score(1, testing::scale("d", 7)) == doctest::Approx(0.0));
  CHECK(normalize_score(2, testing::scale("d", 3)) == doctest::Approx(0.5));
  CHECK(normalize_score(5, testing::scale("d", 5)) == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(normalize_score(6, testing::scale("d", 5)),
                       doctest::Contains("level out of range"), Error);
}

TEST_CASE("normalize_score is strictly increasing with endpoints 0 and 1") {
  for (int k : {2, 3, 5, 7, 11}) {
    const auto s = testing::scale("d", k);
    double prev = -1;
    for (int lv = 1; lv <= k; ++lv) {
      const double v = normalize_score(lv, s);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(normalize_score(1, s) == 0.0);
    CHECK(normalize_score(k, s) == 1.0);
  }
}

TEST_CASE("single-row load normalizes top of scale to 1") {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  std::istringstream in(
      "prompt_id,dimension,model,rater,rater_kind,level,token_length\n"
      "p1,completeness,gpt-4o,human:a1,human,5,\n");
  const auto t = parse_ratings_csv(in, "test", cfg.scales, cfg.config);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].value == doctest::Approx(1.0));
}

TEST_CASE("out-of-range level is rejected with a line number") {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  std::istringstream in(
      "prompt_id,dimension,model,rater,rater_kind,level,token_length\n"
      "p1,completeness,gpt-4o,human:a1,human,6,\n");
  CHECK_THROWS_WITH_AS(parse_ratings_csv(in, "test", cfg.scales, cfg.config),
                       doctest::Contains("level out of range"), Error);
}

TEST_CASE("unknown dimension and duplicate keys are rejected") {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  std::istringstream bad_dim(
      "prompt_id,dimension,model,rater,rater_kind,level,token_length\n"
      "p1,smoothness,gpt-4o,a1,human,3,\n");
  CHECK_THROWS_WITH_AS(parse_ratings_csv(bad_dim, "test", cfg.scales, cfg.config),
                       doctest::Contains("unknown dimension"), Error);

  std::istringstream dup(
      "prompt_id,dimension,model,rater,rater_kind,level,token_length\n"
      "p1,completeness,gpt-4o,a1,human,3,\n"
      "p1,completeness,gpt-4o,a1,human,4,\n");
  CHECK_THROWS_WITH_AS(parse_ratings_csv(dup, "test", cfg.scales, cfg.config),
                       doctest::Contains("duplicate key"), Error);
}

TEST_CASE("54-row fixture loads with the expected index sets") {
  const auto t = load_fixture();
  CHECK(t.rows.size() == 54);
  CHECK(t.prompt_ids().size() == 1);
  CHECK(t.dimension_ids().size() == 6);
  std::set<std::string> models;
  for (const auto& r : t.rows) models.insert(r.model_id);
  CHECK(models.size() == 9);
}

TEST_CASE("aggregate_reference averages normalized human levels") {
  std::vector<RatingRow> rows;
  rows.push_back(testing::human_row("p1", "d", "alpha", "a1", 4, 5));
  rows.push_back(testing::human_row("p1", "d", "alpha", "a2", 4, 5));
  rows.push_back(testing::human_row("p1", "d", "alpha", "a3", 5, 5));
  rows.push_back(testing::human_row("p1", "d", "bravo", "a1", 3, 5));
  rows.push_back(testing::human_row("p2", "d", "alpha", "a1", std::nullopt, 5));
  rows.push_back(testing::human_row("p2", "d", "alpha", "a2", std::nullopt, 5));

  auto t = aggregate_reference(
      make_table(std::move(rows), {{"d", testing::scale("d", 5)}}, testing::two_model_config()));

  CHECK(t.reference.at({"p1", "d", "alpha"}) == doctest::Approx(0.75 + 1.0 / 12).epsilon(1e-12));
  CHECK(t.reference.at({"p1", "d", "alpha"}) == doctest::Approx(0.8333333333).epsilon(1e-9));
  // Singleton annotator: mean of one value, flagged.
  CHECK(t.reference.at({"p1", "d", "bravo"}) == doctest::Approx(0.5));
  CHECK(t.cells_with_single_annotator.count({"p1", "d", "bravo"}) == 1);
  // All-NA cell: no reference, flagged.
  CHECK(t.reference.count({"p2", "d", "alpha"}) == 0);
  CHECK(t.cells_without_reference.count({"p2", "d", "alpha"}) == 1);
}

TEST_CASE("aggregate_reference is invariant to annotator order") {
  std::vector<RatingRow> rows;
  rows.push_back(testing::human_row("p1", "d", "alpha", "a1", 2, 5));
  rows.push_back(testing::human_row("p1", "d", "alpha", "a2", 5, 5));
  rows.push_back(testing::human_row("p1", "d", "alpha", "a3", 3, 5));
  auto fwd = rows;
  std::reverse(rows.begin(), rows.end());
  const auto scales = std::map<std::string, ScaleDef>{{"d", testing::scale("d", 5)}};
  const auto a = aggregate_reference(make_table(fwd, scales, testing::two_model_config()));
  const auto b = aggregate_reference(make_table(rows, scales, testing::two_model_config()));
  CHECK(a.reference.at({"p1", "d", "alpha"}) == b.reference.at({"p1", "d", "alpha"}));
}

TEST_CASE("filter_table restricts rows, config and reference") {
  const auto t = load_fixture();

  FilterSpec drop;
  drop.drop_models = {"mistral-7b", "llama-3-8b"};
  const auto t7 = filter_table(t, drop);
  CHECK(t7.config.models.size() == 7);
  CHECK(t7.config.judges.size() == 9);  // judgments by dropped models remain
  for (const auto& r : t7.rows) {
    CHECK(r.model_id != "mistral-7b");
    CHECK(r.model_id != "llama-3-8b");
  }

  FilterSpec dims;
  dims.dimensions = std::set<std::string>{"faithfulness"};
  const auto tf = filter_table(t, dims);
  for (const auto& r : tf.rows) CHECK(r.dimension_id == "faithfulness");
  CHECK(tf.scales.size() == 1);

  FilterSpec unknown;
  unknown.drop_models = {"nonexistent"};
  CHECK_THROWS_WITH_AS(filter_table(t, unknown), doctest::Contains("unknown model"), Error);
}

TEST_CASE("filter_table by task keeps only matching prompts") {
  std::vector<RatingRow> rows;
  rows.push_back(testing::judge_row("p1", "d", "alpha", "alpha", 0.5));
  rows.push_back(testing::judge_row("p2", "d", "alpha", "alpha", 0.5));
  auto cfg = testing::two_model_config();
  cfg.task_of = {{"p1", "qa"}, {"p2", "summarization"}};
  const auto t =
      make_table(std::move(rows), {{"d", testing::scale("d", 5)}}, cfg);

  FilterSpec spec;
  spec.task_types = std::set<std::string>{"summarization"};
  const auto ts = filter_table(t, spec);
  REQUIRE(ts.rows.size() == 1);
  CHECK(ts.rows[0].prompt_id == "p2");
}

TEST_CASE("filters with disjoint specs commute") {
  const auto t = load_fixture();
  FilterSpec a;
  a.dimensions = std::set<std::string>{"faithfulness", "helpfulness", "conciseness"};
  FilterSpec b;
  b.drop_models = {"claude-v2", "gpt-3.5-turbo"};
  const auto ab = filter_table(filter_table(t, a), b);
  const auto ba = filter_table(filter_table(t, b), a);
  CHECK(canonical_csv(ab) == canonical_csv(ba));
  CHECK(ab.config.models == ba.config.models);
}

TEST_CASE("canonical CSV round-trips bytewise") {
  auto t = load_fixture();
  t = aggregate_reference(std::move(t));
  const std::string csv = canonical_csv(t);
  std::istringstream in(csv);
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  const auto reloaded = parse_ratings_csv(in, "roundtrip", cfg.scales, cfg.config);
  CHECK(canonical_csv(reloaded) == csv);
}

TEST_CASE("row order of the input does not matter") {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  std::ifstream f(testing::data_path("fixtures/ratings54.csv"));
  std::string header, line;
  std::getline(f, header);
  std::vector<std::string> lines;
  while (std::getline(f, line))
    if (!line.empty()) lines.push_back(line);
  std::mt19937 rng(99);
  std::shuffle(lines.begin(), lines.end(), rng);
  std::string shuffled = header + "\n";
  for (const auto& l : lines) shuffled += l + "\n";
  std::istringstream in(shuffled);
  const auto t = parse_ratings_csv(in, "shuffled", cfg.scales, cfg.config);
  CHECK(canonical_csv(t) == canonical_csv(load_fixture()));
}

TEST_CASE("continuous score rows load without a level") {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  std::istringstream in(
      "prompt_id,dimension,model,rater,rater_kind,level,token_length,score\n"
      "p1,completeness,gpt-4o,gpt-4o,llm_judge,,,0.6125\n");
  const auto t = parse_ratings_csv(in, "test", cfg.scales, cfg.config);
  REQUIRE(t.rows.size() == 1);
  CHECK(!t.rows[0].raw_level.has_value());
  CHECK(t.rows[0].value == doctest::Approx(0.6125));
}

TEST_CASE("config export parses back to the same config") {
  const auto cfg = load_config(testing::data_path("fixtures/config9.json"));
  const auto round = parse_config_json(config_to_json(cfg.config, cfg.scales));
  CHECK(round.config.models == cfg.config.models);
  CHECK(round.config.judges == cfg.config.judges);
  CHECK(round.config.family_of == cfg.config.family_of);
  CHECK(round.scales.size() == cfg.scales.size());
}
