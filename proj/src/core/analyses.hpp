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

#include <Eigen/Dense>

#include "core/estimators.hpp"
#include "core/types.hpp"

namespace judgebias {

struct EstimateOptions {
  bool include_family = true;
  bool dimension_fe = true;
  CovType cov_type = CovType::hc1;
  double level = 0.90;
  Coding coding = Coding::reference;
  bool length_control = false;
  bool length_per_judge = true;
  LengthNormalization length_mode = LengthNormalization::per_prompt;
};

/// Self- and family-bias estimates with robust Wald intervals for one slice
/// of the data (or one robustness variant).
struct BiasReport {
  std::string slice_label = "all";
  std::map<std::string, WaldInterval> self_bias;    // judge -> gamma_j
  std::map<std::string, WaldInterval> family_bias;  // family -> lambda_F
  std::map<std::string, WaldInterval> extra_terms;  // e.g. length[judge]
  std::vector<std::string> not_estimable;           // dropped bias columns

  long n = 0;
  int p = 0;
  std::string cov_type = "HC1";
  double condition_number = 0;
  std::vector<std::string> dropped_columns;
  long excluded_rows = 0;
  bool converged = true;  // ordinal variants may fail to converge
};

/// The headline analysis: design build, OLS, robust covariance, Wald
/// intervals for every estimable gamma_j and lambda_F.
BiasReport estimate_bias(const RatingsTable& table, const EstimateOptions& opts = {});

enum class SliceBy { dimension, task };

/// One fit per dimension or per task type. Dimension slices drop the
/// dimension fixed effects; empty or degenerate slices are flagged.
std::vector<BiasReport> slice_bias(const RatingsTable& table, SliceBy by,
                                   const EstimateOptions& opts = {});

/// Length-control robustness: per-judge tanh-normalized length terms added to
/// the regression; their coefficients are reported alongside the bias terms.
BiasReport robustness_length(const RatingsTable& table, const EstimateOptions& opts = {});

/// Ordinal robustness: proportional-odds fits on raw levels, one per
/// dimension, with sandwich Wald intervals on the latent scale.
std::vector<BiasReport> robustness_ordinal(const RatingsTable& table, double level = 0.90);

/// GAM robustness: judge slopes replaced by judge x natural-spline smooths.
BiasReport robustness_gam(const RatingsTable& table, int interior_knots = 4,
                          const EstimateOptions& opts = {});

/// Leave-one-family-out reference: remove the family's completions and
/// judgments, and use the mean rating of its judges as the reference score.
RatingsTable lofo_reference(const RatingsTable& table, const std::string& family);

enum class AlphaMetric { interval, ordinal };

/// Krippendorff's alpha over items (each a multiset of ratings), coincidence
/// matrix formulation with missing data. Undefined (all ratings equal) maps
/// to nullopt.
std::optional<double> krippendorff_alpha(const std::vector<std::vector<double>>& items,
                                         AlphaMetric metric);

/// Fraction of items (with >= 2 raters) on which all raters agree exactly.
std::optional<double> observed_agreement(const std::vector<std::vector<double>>& items);

struct GoldMetrics {
  double accuracy = 0;                   // fraction inside the gold [min,max]
  std::optional<double> correlation;     // Spearman of per-item means
  long annotations = 0;
  long items = 0;
};

/// Accuracy of annotations against the range of gold passes, plus the
/// tie-corrected Spearman correlation between per-item mean ratings.
GoldMetrics gold_accuracy(const std::map<CellKey, std::vector<double>>& annotations,
                          const std::map<CellKey, std::vector<double>>& gold);

/// Tie-corrected Spearman: Pearson correlation of midranks. Constant input
/// has no defined rank correlation -> nullopt.
std::optional<double> spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

struct DimensionAgreement {
  std::optional<double> alpha_interval;
  std::optional<double> alpha_ordinal;
  std::optional<double> observed;
  std::optional<GoldMetrics> gold;
  long items = 0;
};

struct AgreementReport {
  std::map<std::string, DimensionAgreement> per_dimension;
  DimensionAgreement average;
};

/// Annotation-quality metrics from the table's human rows (per dimension and
/// averaged); gold metrics included when a gold table is supplied.
AgreementReport agreement_metrics(const RatingsTable& table,
                                  const RatingsTable* gold = nullptr);

struct CorrelationReport {
  // judge -> dimension -> Spearman rho of judge scores vs reference scores.
  std::map<std::string, std::map<std::string, std::optional<double>>> rho;
};

CorrelationReport judge_reference_correlation(const RatingsTable& table);

struct HeatmapTable {
  std::vector<std::string> row_ids;    // judges in config order, then "human"
  std::vector<std::string> model_ids;  // config order
  Eigen::MatrixXd means;               // NaN when a cell has no ratings
  Eigen::MatrixXd row_normalized;      // NaN for constant/empty rows
  std::vector<std::pair<int, int>> diagonal;  // (row, col) with judge == model
  std::vector<int> constant_rows;
};

/// Judge x model mean normalized scores plus the row-normalized display copy.
HeatmapTable heatmap_means(const RatingsTable& table);

/// Subtract estimated self- and family-bias from each judge rating. Adjusted
/// values are not clamped; rows leaving [0,1] are reported via out_of_range.
RatingsTable debias_scores(const RatingsTable& table, const BiasReport& report,
                           std::vector<RowKey>* out_of_range = nullptr);

}  // namespace judgebias
