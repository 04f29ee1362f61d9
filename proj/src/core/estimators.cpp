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

#include "core/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "core/error.hpp"
#include "core/numeric.hpp"

namespace judgebias {

namespace {

constexpr const char* kModule = "estimators";
constexpr double kRankTolerance = 1e-10;
constexpr double kOrdinalGradTol = 1e-6;
constexpr int kOrdinalMaxIter = 100;
constexpr double kSeparationBound = 30.0;

double stable_logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// (X'X)^-1 from a column-pivoted QR of X.
Eigen::MatrixXd xtx_inverse(const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < X.cols()) fail(kModule, "rank-deficient design in covariance computation");
  const auto p = X.cols();
  const Eigen::MatrixXd R = qr.matrixR().topRows(p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  return perm * (Rinv * Rinv.transpose()) * perm.transpose();
}

}  // namespace

const char* to_string(CovType t) {
  switch (t) {
    case CovType::hc0: return "HC0";
    case CovType::hc1: return "HC1";
    case CovType::cluster: return "cluster";
  }
  return "?";
}

CovType cov_type_from_string(const std::string& s) {
  if (s == "HC0" || s == "hc0") return CovType::hc0;
  if (s == "HC1" || s == "hc1") return CovType::hc1;
  if (s == "cluster") return CovType::cluster;
  fail(kModule, "unknown covariance type '" + s + "'");
}

int FitResult::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name() == name) return static_cast<int>(i);
  return -1;
}

double FitResult::coefficient(const std::string& name) const {
  const int i = column_index(name);
  if (i < 0) fail(kModule, "no coefficient for column '" + name + "'");
  return coefficients(i);
}

double FitResult::std_error(const std::string& name) const {
  const int i = column_index(name);
  if (i < 0) fail(kModule, "no coefficient for column '" + name + "'");
  if (covariance.size() == 0) fail(kModule, "covariance not computed");
  return std::sqrt(std::max(0.0, covariance(i, i)));
}

FitResult ols_fit(const DesignMatrix& design) {
  const auto n = design.n();
  const auto p = design.p();
  if (n <= p)
    fail(kModule, "need more rows than columns (n=" + std::to_string(n) +
                      ", p=" + std::to_string(p) + ")");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p) {
    const auto& perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      if (!names.empty()) names += ", ";
      names += design.columns[static_cast<std::size_t>(perm(k))].name();
    }
    fail(kModule, "design is rank deficient; dependent columns: " + names);
  }

  FitResult fr;
  fr.coefficients = qr.solve(design.y);
  fr.columns = design.columns;
  fr.residuals = design.y - design.X * fr.coefficients;
  fr.n = n;
  fr.p = p;

  // Singular values of X equal those of R from the pivoted QR.
  const Eigen::MatrixXd R = qr.matrixR().topRows(p).template triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
  const auto& sv = svd.singularValues();
  fr.condition_number = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  return fr;
}

Eigen::MatrixXd robust_covariance(const DesignMatrix& design, const Eigen::VectorXd& residuals,
                                  CovType type, const std::vector<int>* cluster_ids) {
  const auto n = design.n();
  const auto p = design.p();
  if (residuals.size() != n) fail(kModule, "residual length does not match design rows");

  const Eigen::MatrixXd bread = xtx_inverse(design.X);
  Eigen::MatrixXd meat(p, p);
  if (type == CovType::cluster) {
    if (!cluster_ids || static_cast<long>(cluster_ids->size()) != n)
      fail(kModule, "cluster ids must cover every row");
    std::map<int, Eigen::VectorXd> scores;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto [it, fresh] = scores.try_emplace((*cluster_ids)[static_cast<std::size_t>(i)],
                                            Eigen::VectorXd::Zero(p));
      it->second += design.X.row(i).transpose() * residuals(i);
    }
    meat.setZero();
    for (const auto& [id, s] : scores) meat += s * s.transpose();
  } else {
    const Eigen::MatrixXd Xe = design.X.array().colwise() * residuals.array();
    meat = Xe.transpose() * Xe;
    if (type == CovType::hc1) {
      if (n <= p) fail(kModule, "HC1 needs n > p");
      meat *= static_cast<double>(n) / static_cast<double>(n - p);
    }
  }
  Eigen::MatrixXd cov = bread * meat * bread;
  return (cov + cov.transpose()) / 2.0;  // exact symmetry
}

WaldInterval wald(double estimate, double std_error, double level) {
  if (!(level > 0.0 && level < 1.0)) fail(kModule, "confidence level must be in (0,1)");
  if (std_error < 0) fail(kModule, "negative standard error");

  WaldInterval w;
  w.estimate = estimate;
  w.std_error = std_error;
  w.level = level;
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  w.lower = estimate - z * std_error;
  w.upper = estimate + z * std_error;
  w.reject_zero = (0.0 < w.lower) || (0.0 > w.upper);
  if (std_error == 0)
    w.p_value = estimate == 0 ? 1.0 : 0.0;
  else
    w.p_value = two_sided_p(estimate / std_error);
  return w;
}

int OrdinalFit::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name() == name) return static_cast<int>(i);
  return -1;
}

double OrdinalFit::coef_variance(int coef_index) const {
  const auto off = cutpoints.size() + coef_index;
  return sandwich_covariance(off, off);
}

namespace {

/// Log-likelihood, gradient and Hessian of the proportional-odds model in the
/// natural parameterization (theta, b).
struct OrdinalDerivs {
  double ll = 0;
  Eigen::VectorXd grad;   // K-1 + p
  Eigen::MatrixXd hess;   // observed: d2 ll
};

OrdinalDerivs ordinal_derivs(const Eigen::MatrixXd& X, const std::vector<int>& levels,
                             int K, const Eigen::VectorXd& theta, const Eigen::VectorXd& b,
                             Eigen::MatrixXd* per_row_scores) {
  const auto n = X.rows();
  const auto p = X.cols();
  const auto dim = (K - 1) + p;
  OrdinalDerivs d;
  d.grad = Eigen::VectorXd::Zero(dim);
  d.hess = Eigen::MatrixXd::Zero(dim, dim);
  if (per_row_scores) per_row_scores->setZero(n, dim);

  const Eigen::VectorXd eta = X * b;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = levels[static_cast<std::size_t>(i)];  // 1..K
    const bool has_up = k < K;
    const bool has_lo = k > 1;
    const double u = has_up ? theta(k - 1) - eta(i) : 0.0;
    const double v = has_lo ? theta(k - 2) - eta(i) : 0.0;
    const double Fu = has_up ? stable_logistic(u) : 1.0;
    const double Fv = has_lo ? stable_logistic(v) : 0.0;
    const double P = std::max(Fu - Fv, 1e-300);
    d.ll += std::log(P);

    const double fu = has_up ? Fu * (1.0 - Fu) : 0.0;
    const double fv = has_lo ? Fv * (1.0 - Fv) : 0.0;
    const double fpu = has_up ? fu * (1.0 - 2.0 * Fu) : 0.0;
    const double fpv = has_lo ? fv * (1.0 - 2.0 * Fv) : 0.0;

    // dll/du, dll/dv and second derivatives of log(F(u) - F(v)).
    const double gu = fu / P;
    const double gv = -fv / P;
    const double huu = fpu / P - (fu * fu) / (P * P);
    const double hvv = -fpv / P - (fv * fv) / (P * P);
    const double huv = (fu * fv) / (P * P);

    // theta is zero-based: theta(0) = theta_1, ..., theta(K-2) = theta_{K-1}.
    // For level k the upper cutpoint is theta_k (slot k-1), the lower is
    // theta_{k-1} (slot k-2); eta enters both with a minus sign.
    Eigen::VectorXd gi = Eigen::VectorXd::Zero(dim);
    const int slot_up = has_up ? k - 1 : -1;
    const int slot_lo = has_lo ? k - 2 : -1;
    if (slot_up >= 0) gi(slot_up) = gu;
    if (slot_lo >= 0) gi(slot_lo) = gv;
    const double geta = -(gu + gv);
    for (Eigen::Index c = 0; c < p; ++c) gi(K - 1 + c) = geta * X(i, c);

    d.grad += gi;
    if (per_row_scores) per_row_scores->row(i) = gi.transpose();

    // Hessian contribution.
    if (slot_up >= 0) d.hess(slot_up, slot_up) += huu;
    if (slot_lo >= 0) d.hess(slot_lo, slot_lo) += hvv;
    if (slot_up >= 0 && slot_lo >= 0) {
      d.hess(slot_up, slot_lo) += huv;
      d.hess(slot_lo, slot_up) += huv;
    }
    const double hue = -(huu + huv);
    const double hve = -(hvv + huv);
    for (Eigen::Index c = 0; c < p; ++c) {
      const double xc = X(i, c);
      if (slot_up >= 0) {
        d.hess(slot_up, K - 1 + c) += hue * xc;
        d.hess(K - 1 + c, slot_up) += hue * xc;
      }
      if (slot_lo >= 0) {
        d.hess(slot_lo, K - 1 + c) += hve * xc;
        d.hess(K - 1 + c, slot_lo) += hve * xc;
      }
    }
    const double hee = huu + 2.0 * huv + hvv;
    for (Eigen::Index c = 0; c < p; ++c)
      for (Eigen::Index c2 = 0; c2 < p; ++c2) d.hess(K - 1 + c, K - 1 + c2) += hee * X(i, c) * X(i, c2);
  }
  return d;
}

/// theta from the transformed parameters (t1, log-gaps).
Eigen::VectorXd theta_from_transformed(const Eigen::VectorXd& t, int K) {
  Eigen::VectorXd theta(K - 1);
  theta(0) = t(0);
  for (int k = 1; k < K - 1; ++k) theta(k) = theta(k - 1) + std::exp(t(k));
  return theta;
}

}  // namespace

OrdinalFit ordinal_fit(const DesignMatrix& design, const std::vector<int>& levels,
                       int num_levels) {
  const auto n = design.n();
  const auto p = design.p();
  const int K = num_levels;
  if (K < 2) fail(kModule, "ordinal fit needs at least 2 levels");
  if (static_cast<long>(levels.size()) != n) fail(kModule, "levels length does not match design rows");
  for (const auto& c : design.columns)
    if (c.kind == ColumnKind::intercept)
      fail(kModule, "ordinal design must not contain an intercept; cutpoints absorb location");

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
  for (int lv : levels) {
    if (lv < 1 || lv > K) fail(kModule, "level " + std::to_string(lv) + " outside 1.." + std::to_string(K));
    counts(lv - 1) += 1;
  }
  int distinct = 0;
  for (int k = 0; k < K; ++k)
    if (counts(k) > 0) ++distinct;
  if (distinct < 2) fail(kModule, "ordinal fit needs at least 2 observed levels");
  if (!design.X.allFinite()) fail(kModule, "non-finite covariate in ordinal design");

  // Start from empirical cumulative logits, slopes at zero. Empty interior
  // categories get a small floor so the starting cutpoints are finite.
  Eigen::VectorXd cum(K - 1);
  double acc = 0;
  for (int k = 0; k < K - 1; ++k) {
    acc += std::max(counts(k), 0.5);
    cum(k) = acc;
  }
  double total = 0;
  for (int k = 0; k < K; ++k) total += std::max(counts(k), 0.5);
  Eigen::VectorXd params(K - 1 + p);
  params.setZero();
  {
    Eigen::VectorXd theta0(K - 1);
    for (int k = 0; k < K - 1; ++k) {
      const double q = std::min(std::max(cum(k) / total, 1e-9), 1.0 - 1e-9);
      theta0(k) = std::log(q / (1.0 - q));
    }
    params(0) = theta0(0);
    for (int k = 1; k < K - 1; ++k) params(k) = std::log(std::max(theta0(k) - theta0(k - 1), 1e-6));
  }

  const auto eval = [&](const Eigen::VectorXd& ps, Eigen::MatrixXd* scores) {
    const Eigen::VectorXd theta = theta_from_transformed(ps.head(K - 1), K);
    const Eigen::VectorXd b = ps.tail(p);
    return std::pair{ordinal_derivs(design.X, levels, K, theta, b, scores), theta};
  };

  OrdinalFit fit;
  fit.columns = design.columns;
  fit.n = n;

  auto [cur, theta] = eval(params, nullptr);
  int it = 0;
  bool converged = false;
  for (; it < kOrdinalMaxIter; ++it) {
    // Transform gradient/Hessian to the (t1, log-gap, b) space.
    const auto dim = (K - 1) + p;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < K - 1; ++k) {
      J(k, 0) = 1.0;
      for (int l = 1; l <= k; ++l) J(k, l) = std::exp(params(l));
    }
    for (Eigen::Index c = 0; c < p; ++c) J(K - 1 + c, K - 1 + c) = 1.0;

    const Eigen::VectorXd grad_t = J.transpose() * cur.grad;
    Eigen::MatrixXd hess_t = J.transpose() * cur.hess * J;
    // Second-derivative term of the exp reparameterization.
    for (int l = 1; l < K - 1; ++l) {
      double s = 0;
      for (int k = l; k < K - 1; ++k) s += cur.grad(k);
      hess_t(l, l) += s * std::exp(params(l));
    }

    // Convergence is judged on the natural-parameter gradient.
    if (cur.grad.cwiseAbs().maxCoeff() <= kOrdinalGradTol) {
      converged = true;
      break;
    }

    // Newton direction with Levenberg-style damping on non-invertibility.
    Eigen::VectorXd step;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd H = -hess_t;
      if (ridge > 0) H += ridge * Eigen::MatrixXd::Identity(dim, dim);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = ldlt.solve(grad_t);
        if (step.allFinite()) break;
      }
      ridge = ridge == 0 ? 1e-8 : ridge * 10;
      step.resize(0);
    }
    if (step.size() == 0) fail(kModule, "ordinal Newton step failed");

    // Step-halving line search: accept only likelihood increases.
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      const Eigen::VectorXd trial = params + t * step;
      auto [trial_derivs, trial_theta] = eval(trial, nullptr);
      if (std::isfinite(trial_derivs.ll) && trial_derivs.ll > cur.ll) {
        params = trial;
        cur = std::move(trial_derivs);
        theta = trial_theta;
        accepted = true;
        break;
      }
      t /= 2;
    }
    if (!accepted) break;  // no improving step: report non-convergence below

    if (p > 0) {
      const Eigen::VectorXd b = params.tail(p);
      if (b.cwiseAbs().maxCoeff() > kSeparationBound) {
        Eigen::Index worst = 0;
        b.cwiseAbs().maxCoeff(&worst);
        fail(kModule, "apparent complete separation: coefficient of '" +
                          design.columns[static_cast<std::size_t>(worst)].name() + "' diverged");
      }
    }
  }
  if (!converged && cur.grad.cwiseAbs().maxCoeff() <= kOrdinalGradTol) converged = true;

  fit.cutpoints = theta;
  fit.coefficients = params.tail(p);
  fit.log_likelihood = cur.ll;
  fit.iterations = it;
  fit.converged = converged;

  // Sandwich A^-1 B A^-1 in the natural parameterization: A = observed
  // information, B = sum of per-row score outer products.
  Eigen::MatrixXd scores;
  auto [final_derivs, final_theta] = eval(params, &scores);
  const Eigen::MatrixXd A = -final_derivs.hess;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    fail(kModule, "observed information is singular at the ordinal optimum");
  const Eigen::MatrixXd B = scores.transpose() * scores;
  const Eigen::MatrixXd Ainv =
      ldlt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
  Eigen::MatrixXd cov = Ainv * B * Ainv;
  fit.sandwich_covariance = (cov + cov.transpose()) / 2.0;
  return fit;
}

Eigen::MatrixXd ordinal_predicted_probs(const OrdinalFit& fit, const Eigen::MatrixXd& X,
                                        int num_levels) {
  const auto n = X.rows();
  const int K = num_levels;
  const Eigen::VectorXd eta = X * fit.coefficients;
  Eigen::MatrixXd P(n, K);
  for (Eigen::Index i = 0; i < n; ++i) {
    double prev = 0.0;
    for (int k = 0; k < K; ++k) {
      const double F = k < K - 1 ? stable_logistic(fit.cutpoints(k) - eta(i)) : 1.0;
      P(i, k) = F - prev;
      prev = F;
    }
  }
  return P;
}

}  // namespace judgebias
