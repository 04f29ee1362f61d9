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

#include "core/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/numeric.hpp"

namespace judgebias {

namespace {

constexpr const char* kModule = "synth";

void validate(const SimConfig& c) {
  if (c.num_prompts <= 0) fail(kModule, "num_prompts must be positive");
  if (c.judges.empty()) fail(kModule, "no judges configured");
  if (c.models.empty()) fail(kModule, "no models configured");
  if (c.dimensions.empty()) fail(kModule, "no dimensions configured");
  for (const auto& j : c.judges) {
    if (j.noise_sd < 0) fail(kModule, "negative noise_sd for judge '" + j.id + "'");
    const bool is_model = std::any_of(c.models.begin(), c.models.end(),
                                      [&](const ModelSim& m) { return m.id == j.id; });
    if (!is_model) fail(kModule, "judge '" + j.id + "' is not in the model list");
  }
  for (const auto& m : c.models)
    if (m.quality_sd < 0) fail(kModule, "negative quality_sd for model '" + m.id + "'");
}

ModelConfig model_config_of(const SimConfig& c) {
  ModelConfig mc;
  for (const auto& m : c.models) {
    mc.models.push_back(m.id);
    mc.family_of[m.id] = m.family.empty() ? m.id : m.family;
  }
  for (const auto& j : c.judges) mc.judges.push_back(j.id);
  return mc;
}

std::string prompt_name(long i, long total) {
  // Zero-padded so lexicographic row order equals generation order.
  std::string num = std::to_string(i + 1);
  const std::string width = std::to_string(total);
  return "p" + std::string(width.size() - num.size(), '0') + num;
}

}  // namespace

SimConfig parse_sim_config_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(kModule, std::string("sim config is not valid JSON: ") + e.what());
  }
  SimConfig c;
  try {
    c.num_prompts = j.at("num_prompts").get<long>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.alpha = j.value("alpha", 0.0);
    for (const auto& [id, ej] : j.at("judges").items()) {
      JudgeSim js;
      js.id = id;
      js.beta = ej.value("beta", 0.8);
      js.delta = ej.value("delta", 0.0);
      js.gamma = ej.value("gamma", 0.0);
      js.noise_sd = ej.value("noise_sd", 0.1);
      c.judges.push_back(std::move(js));
    }
    for (const auto& [id, em] : j.at("models").items()) {
      ModelSim ms;
      ms.id = id;
      ms.family = em.value("family", id);
      ms.quality_mean = em.value("quality_mean", 0.5);
      ms.quality_sd = em.value("quality_sd", 0.1);
      if (em.contains("dimension_mean_shift"))
        for (const auto& [dim, v] : em.at("dimension_mean_shift").items())
          ms.dimension_mean_shift[dim] = v.get<double>();
      c.models.push_back(std::move(ms));
    }
    if (j.contains("family_lambda"))
      for (const auto& [fam, v] : j.at("family_lambda").items())
        c.family_lambda[fam] = v.get<double>();
    if (j.contains("dimensions")) {
      for (const auto& [dim, eta] : j.at("dimensions").items())
        c.dimensions.emplace_back(dim, eta.get<double>());
    } else {
      c.dimensions.emplace_back("quality", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(kModule, std::string("bad sim config structure: ") + e.what());
  }
  validate(c);
  return c;
}

SimConfig load_sim_config(const std::string& path) {
  return parse_sim_config_json(read_file(path));
}

RatingsTable simulate(const SimConfig& config) {
  validate(config);
  const ModelConfig mc = model_config_of(config);

  std::map<std::string, ScaleDef> scales;
  for (const auto& [dim, eta] : config.dimensions) {
    ScaleDef s;
    s.dimension_id = dim;
    s.num_levels = 5;  // nominal scale so discretize() has a default K
    s.na_labels = {"na"};
    scales[dim] = s;
  }

  std::vector<RatingRow> rows;
  rows.reserve(static_cast<std::size_t>(config.num_prompts) * config.dimensions.size() *
               config.models.size() * (config.judges.size() + 1));

  const bool per_dim_quality = std::any_of(
      config.models.begin(), config.models.end(),
      [](const ModelSim& m) { return !m.dimension_mean_shift.empty(); });

  for (long i = 0; i < config.num_prompts; ++i) {
    // Independent substream per prompt: parallel generation would match
    // serial generation draw for draw.
    RandomStream rng = RandomStream::substream(config.seed, static_cast<std::uint64_t>(i));
    const std::string prompt = prompt_name(i, config.num_prompts);

    // Quality draws: one per model, or one per (model, dimension) when any
    // model configures per-dimension shifts.
    std::map<std::pair<std::string, std::string>, double> quality;  // (model, dim) -> S
    for (const auto& m : config.models) {
      if (per_dim_quality) {
        for (const auto& [dim, eta] : config.dimensions) {
          double mean = m.quality_mean;
          const auto it = m.dimension_mean_shift.find(dim);
          if (it != m.dimension_mean_shift.end()) mean += it->second;
          quality[{m.id, dim}] = rng.next_truncated_normal(mean, m.quality_sd, 0.0, 1.0);
        }
      } else {
        const double s = rng.next_truncated_normal(m.quality_mean, m.quality_sd, 0.0, 1.0);
        for (const auto& [dim, eta] : config.dimensions) quality[{m.id, dim}] = s;
      }
    }

    for (const auto& [dim, eta] : config.dimensions) {
      for (const auto& m : config.models) {
        const double s = quality.at({m.id, dim});

        RatingRow ref;
        ref.prompt_id = prompt;
        ref.dimension_id = dim;
        ref.model_id = m.id;
        ref.rater_id = "reference";
        ref.rater_kind = RaterKind::human;
        ref.value = s;
        rows.push_back(std::move(ref));

        for (const auto& judge : config.judges) {
          const double eps = judge.noise_sd > 0 ? judge.noise_sd * rng.next_normal() : 0.0;
          double score = config.alpha + judge.delta + judge.beta * s + eta + eps;
          if (judge.id == m.id) {
            score += judge.gamma;
          } else {
            const auto& fj = mc.family(judge.id);
            if (fj == mc.family(m.id)) {
              const auto it = config.family_lambda.find(fj);
              if (it != config.family_lambda.end()) score += it->second;
            }
          }
          RatingRow r;
          r.prompt_id = prompt;
          r.dimension_id = dim;
          r.model_id = m.id;
          r.rater_id = judge.id;
          r.rater_kind = RaterKind::llm_judge;
          r.value = score;  // continuous; deliberately not clamped to [0, 1]
          rows.push_back(std::move(r));
        }
      }
    }
  }

  RatingsTable t = make_table(std::move(rows), std::move(scales), mc);
  return aggregate_reference(std::move(t));
}

SimConfig quality_shift_panel_config(long num_prompts, std::uint64_t seed, int panel,
                                     double noise_sd) {
  if (panel < 0 || panel > 2) fail(kModule, "panel must be 0 (lower), 1 (equal) or 2 (higher)");
  const double delta_quality = (panel - 1) * 0.25;

  SimConfig c;
  c.num_prompts = num_prompts;
  // Substream the seed per panel so panels differ but the suite is one seed.
  c.seed = seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(panel + 1));
  c.alpha = 0;
  c.judges.push_back({"judge-model", 0.8, 0.0, 0.25, noise_sd});
  ModelSim own;
  own.id = "judge-model";
  own.family = "family-a";
  own.quality_mean = 0.5 + delta_quality;
  own.quality_sd = 0.1;
  ModelSim peer;
  peer.id = "peer-model";
  peer.family = "family-b";
  peer.quality_mean = 0.5;
  peer.quality_sd = 0.1;
  c.models = {own, peer};
  c.dimensions.emplace_back("quality", 0.0);
  return c;
}

RatingsTable simulate_quality_shift_panel(long num_prompts, std::uint64_t seed, int panel,
                                          double noise_sd) {
  return simulate(quality_shift_panel_config(num_prompts, seed, panel, noise_sd));
}

Fig1Suite simulate_quality_shift_suite(long num_prompts, std::uint64_t seed, double noise_sd) {
  Fig1Suite suite;
  for (int panel = 0; panel < 3; ++panel) {
    suite.delta_quality[static_cast<std::size_t>(panel)] = (panel - 1) * 0.25;
    suite.panels[static_cast<std::size_t>(panel)] =
        simulate_quality_shift_panel(num_prompts, seed, panel, noise_sd);
  }
  return suite;
}

RatingsTable discretize(const RatingsTable& table, const ScaleDef& scale,
                        const std::vector<double>* thresholds) {
  const int K = scale.num_levels;
  if (K < 2) fail(kModule, "discretize needs a scale with >= 2 levels");
  if (thresholds) {
    if (static_cast<int>(thresholds->size()) != K - 1)
      fail(kModule, "need K-1 thresholds, got " + std::to_string(thresholds->size()));
    if (!std::is_sorted(thresholds->begin(), thresholds->end()))
      fail(kModule, "thresholds must be increasing");
  }

  const auto level_of = [&](double score) {
    if (thresholds) {
      int level = 1;
      for (double t : *thresholds)
        if (score >= t) ++level;
      return level;
    }
    // Equal-width bins on [0, 1], right-closed at the top.
    const int bin = static_cast<int>(std::floor(score * K)) + 1;
    return std::clamp(bin, 1, K);
  };

  RatingsTable out = table;
  for (auto& r : out.rows) {
    if (r.rater_kind != RaterKind::llm_judge || r.is_na()) continue;
    const int lv = level_of(*r.value);
    r.raw_level = lv;
    r.value = normalize_score(lv, scale);
  }
  // Judge rows now carry levels 1..K on every dimension.
  for (auto& [dim, s] : out.scales) s.num_levels = K;
  return out;
}

}  // namespace judgebias
