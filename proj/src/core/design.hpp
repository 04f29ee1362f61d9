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

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace judgebias {

enum class ColumnKind {
  intercept,
  judge_fe,
  judge_slope,
  self_bias,
  family_bias,
  dimension_fe,
  length_ctrl,
  spline_basis,
};

const char* to_string(ColumnKind k);

struct ColumnMeta {
  ColumnKind kind = ColumnKind::intercept;
  std::string judge_id;
  std::string family_id;
  std::string dimension_id;
  int basis_index = -1;

  std::string name() const;
};

/// Numeric realization of the bias regression: one row per judge rating with
/// a reference score, columns as described by `columns`.
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<ColumnMeta> columns;
  std::vector<RowKey> row_keys;
  std::vector<std::string> dropped_columns;  // all-zero or collinear candidates
  long excluded_rows = 0;                    // judge rows without reference / NA

  long n() const { return X.rows(); }
  int p() const { return static_cast<int>(X.cols()); }
  int column_index(const std::string& name) const;  // -1 when absent
};

enum class Coding { reference, sum_to_zero };

struct BuildOptions {
  bool include_family = true;
  bool dimension_fe = true;
  bool intercept = true;
  Coding coding = Coding::reference;
  // Baseline category for reference coding; lexicographically first if unset.
  std::optional<std::string> baseline_judge;
  std::optional<std::string> baseline_dimension;
};

/// Build the design for the linear bias model. Requires aggregated reference
/// scores and at least one judge that also appears as a model.
DesignMatrix build_design(const RatingsTable& table, const BuildOptions& opts = {});

enum class LengthNormalization { per_prompt, global };

/// tanh of the standardized completion length, standardized across the models
/// of each prompt (population variance), or globally.
std::map<std::pair<std::string, std::string>, double> compute_length_features(
    const RatingsTable& table, LengthNormalization mode = LengthNormalization::per_prompt);

/// Append length-control columns: one per judge (feature x judge indicator)
/// or a single shared column. All-zero columns are dropped with a warning.
DesignMatrix add_length_control(
    DesignMatrix design,
    const std::map<std::pair<std::string, std::string>, double>& features, bool per_judge);

struct SplineBasis {
  Eigen::MatrixXd basis;       // n x (interior_knots + 1), intercept excluded
  std::vector<double> knots;   // boundary + interior, ascending, deduplicated
};

/// Natural cubic spline basis with interior knots at equally spaced empirical
/// quantiles. The basis is linear beyond the boundary knots; with 0 interior
/// knots it reduces to the identity column {s}.
SplineBasis spline_basis(const Eigen::VectorXd& s_values, int num_interior_knots);

/// Evaluate a natural-spline basis with fixed knots at arbitrary points.
Eigen::MatrixXd spline_basis_at(const std::vector<double>& knots, const Eigen::VectorXd& s);

/// GAM design: judge_slope columns replaced by judge x spline-basis columns.
DesignMatrix build_gam_design(const RatingsTable& table, int num_interior_knots,
                              const BuildOptions& opts = {});

/// Debug export of X/y with column names for external cross-checking.
void write_design_csv(const DesignMatrix& design, const std::string& path);

}  // namespace judgebias
