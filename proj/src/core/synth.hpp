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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace judgebias {

struct JudgeSim {
  std::string id;
  double beta = 0.8;
  double delta = 0;
  double gamma = 0;
  double noise_sd = 0.1;
};

struct ModelSim {
  std::string id;
  std::string family;
  double quality_mean = 0.5;
  double quality_sd = 0.1;  // truncated to [0, 1]
  // Optional per-dimension shift of the quality mean.
  std::map<std::string, double> dimension_mean_shift;
};

/// Generative configuration for the bias regression world. The seed fully
/// determines the output; per-prompt substreams make generation order-free.
struct SimConfig {
  long num_prompts = 0;
  double alpha = 0;
  std::vector<JudgeSim> judges;   // each judge id must also be a model id
  std::vector<ModelSim> models;
  std::map<std::string, double> family_lambda;      // family -> lambda_F
  std::vector<std::pair<std::string, double>> dimensions;  // (id, eta_d)
  std::uint64_t seed = 0;
};

SimConfig parse_sim_config_json(const std::string& json_text);
SimConfig load_sim_config(const std::string& path);

/// Draw a table from the generative model: S per (prompt, model) from the
/// truncated quality distribution, judge scores from the linear model with
/// Gaussian noise. Continuous scores; the true S fills the reference map and
/// is also emitted as a single human row per cell.
RatingsTable simulate(const SimConfig& config);

/// The three quality-shift scenarios: one judge with beta=0.8, gamma=0.25
/// scoring its own and one peer model, with the judge's quality mean shifted
/// by delta_quality in {-0.25, 0, +0.25}.
struct Fig1Suite {
  std::array<RatingsTable, 3> panels;  // lower, equal, higher
  std::array<double, 3> delta_quality;
};

Fig1Suite simulate_quality_shift_suite(long num_prompts, std::uint64_t seed,
                                       double noise_sd = 0.1);

/// One panel of the suite: 0 = judge quality lower, 1 = equal, 2 = higher.
RatingsTable simulate_quality_shift_panel(long num_prompts, std::uint64_t seed, int panel,
                                          double noise_sd = 0.1);

/// SimConfig of a suite panel (for manifest reporting / re-simulation).
SimConfig quality_shift_panel_config(long num_prompts, std::uint64_t seed, int panel,
                                     double noise_sd = 0.1);

/// Map continuous judge scores to levels 1..K: equal-width bins on [0, 1]
/// with a right-closed top bin, or custom increasing thresholds (K-1 values).
RatingsTable discretize(const RatingsTable& table, const ScaleDef& scale,
                        const std::vector<double>* thresholds = nullptr);

}  // namespace judgebias
