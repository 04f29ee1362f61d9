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

#include <optional>
#include <string>
#include <vector>

#include "core/design.hpp"

namespace judgebias {

enum class CovType { hc0, hc1, cluster };

const char* to_string(CovType t);
CovType cov_type_from_string(const std::string& s);

struct FitResult {
  Eigen::VectorXd coefficients;
  std::vector<ColumnMeta> columns;
  Eigen::MatrixXd covariance;  // robust; filled by robust_covariance
  Eigen::VectorXd residuals;
  long n = 0;
  int p = 0;
  CovType cov_type = CovType::hc1;
  double condition_number = 0;

  int column_index(const std::string& name) const;  // -1 when absent
  double coefficient(const std::string& name) const;
  double std_error(const std::string& name) const;
};

/// Least squares via column-pivoted QR; never forms the normal equations.
/// Errors on n <= p and on rank deficiency (naming the dependent columns).
FitResult ols_fit(const DesignMatrix& design);

/// Heteroskedasticity-robust covariance of the OLS coefficients.
/// HC0 = (X'X)^-1 X' diag(e^2) X (X'X)^-1, HC1 = HC0 * n/(n-p); cluster mode
/// sums score vectors within clusters before the outer product.
Eigen::MatrixXd robust_covariance(const DesignMatrix& design, const Eigen::VectorXd& residuals,
                                  CovType type,
                                  const std::vector<int>* cluster_ids = nullptr);

struct WaldInterval {
  double estimate = 0;
  double std_error = 0;
  double level = 0.90;
  double lower = 0;
  double upper = 0;
  double p_value = 1;
  bool reject_zero = false;
};

/// Two-sided Wald interval/test under asymptotic normality.
WaldInterval wald(double estimate, double std_error, double level = 0.90);

struct OrdinalFit {
  Eigen::VectorXd cutpoints;            // K-1, strictly increasing
  Eigen::VectorXd coefficients;         // aligned with columns
  std::vector<ColumnMeta> columns;
  Eigen::MatrixXd sandwich_covariance;  // over (cutpoints, coefficients)
  double log_likelihood = 0;
  int iterations = 0;
  bool converged = false;
  long n = 0;

  int column_index(const std::string& name) const;
  /// Variance of a slope coefficient from the sandwich (offset past cutpoints).
  double coef_variance(int coef_index) const;
};

/// Proportional-odds logistic regression, P(Y <= k | x) = logistic(theta_k -
/// x'b), fitted by damped Newton on a reparameterization with free theta_1 and
/// log-gaps. Positive b means higher ratings. The design must not contain an
/// intercept column; the cutpoints absorb location.
OrdinalFit ordinal_fit(const DesignMatrix& design, const std::vector<int>& levels,
                       int num_levels);

/// Predicted category probabilities of a fitted ordinal model, one row per
/// observation, columns 1..K.
Eigen::MatrixXd ordinal_predicted_probs(const OrdinalFit& fit, const Eigen::MatrixXd& X,
                                        int num_levels);

}  // namespace judgebias
