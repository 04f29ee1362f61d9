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

#include <cmath>

#include "core/estimators.hpp"
#include "core/numeric.hpp"
#include "oracles.hpp"

using namespace judgebias;

namespace {

DesignMatrix raw_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        bool with_intercept_meta = true) {
  DesignMatrix d;
  d.X = X;
  d.y = y;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    ColumnMeta m;
    if (c == 0 && with_intercept_meta) {
      m.kind = ColumnKind::intercept;
    } else {
      m.kind = ColumnKind::judge_slope;
      m.judge_id = "col" + std::to_string(c);
    }
    d.columns.push_back(m);
  }
  d.row_keys.resize(static_cast<std::size_t>(X.rows()));
  return d;
}

Eigen::MatrixXd random_matrix(RandomStream& rng, Eigen::Index n, Eigen::Index p) {
  Eigen::MatrixXd X(n, p);
  X.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 1; c < p; ++c) X(i, c) = rng.next_normal();
  return X;
}

}  // namespace

TEST_CASE("two noiseless points recover offset and slope exactly") {
  Eigen::MatrixXd X(2, 2);
  X << 1, 0, 1, 1;
  Eigen::VectorXd y(2);
  y << 0.4, 0.65;
  const auto fit = ols_fit(raw_design(X, y));
  CHECK(fit.coefficients(0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(fit.coefficients(1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero response gives zero coefficients") {
  RandomStream rng(5);
  const Eigen::MatrixXd X = random_matrix(rng, 20, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(20);
  const auto fit = ols_fit(raw_design(X, y));
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("random systems match the normal-equations oracle") {
  RandomStream rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 50, p = 6;
    const Eigen::MatrixXd X = random_matrix(rng, n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.next_normal();

    oracles::Matrix Xo(n, std::vector<double>(p));
    std::vector<double> yo(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      yo[static_cast<std::size_t>(i)] = y(i);
      for (Eigen::Index c = 0; c < p; ++c) Xo[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = X(i, c);
    }
    const auto expect = oracles::normal_equations_ols(Xo, yo);
    const auto fit = ols_fit(raw_design(X, y));
    for (Eigen::Index c = 0; c < p; ++c)
      CHECK(fit.coefficients(c) == doctest::Approx(expect[static_cast<std::size_t>(c)]).epsilon(1e-8));
  }
}

TEST_CASE("residuals are orthogonal to the design") {
  RandomStream rng(13);
  const Eigen::MatrixXd X = random_matrix(rng, 200, 5);
  Eigen::VectorXd y(200);
  for (Eigen::Index i = 0; i < 200; ++i) y(i) = 0.3 * X(i, 1) + 0.1 * rng.next_normal();
  const auto fit = ols_fit(raw_design(X, y));
  const Eigen::VectorXd xte = X.transpose() * fit.residuals;
  CHECK(xte.cwiseAbs().maxCoeff() <= 1e-8 * static_cast<double>(fit.n));
}

TEST_CASE("duplicate columns are rejected by name") {
  Eigen::MatrixXd X(10, 3);
  RandomStream rng(17);
  for (Eigen::Index i = 0; i < 10; ++i) {
    X(i, 0) = 1;
    X(i, 1) = rng.next_normal();
    X(i, 2) = X(i, 1);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
  CHECK_THROWS_WITH_AS(ols_fit(raw_design(X, y)), doctest::Contains("rank deficient"), Error);
}

TEST_CASE("n <= p is rejected") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_WITH_AS(ols_fit(raw_design(X, y)), doctest::Contains("more rows than columns"),
                       Error);
}

TEST_CASE("HC0 hand fixture: constant column, residuals (1,-2,1)") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd e(3);
  e << 1, -2, 1;
  const auto d = raw_design(X, Eigen::VectorXd::Zero(3));
  const auto cov = robust_covariance(d, e, CovType::hc0);
  CHECK(cov(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(cov(0, 0) == doctest::Approx(0.6667).epsilon(1e-4));
}

TEST_CASE("HC0 matches the hand-expanded sandwich on random designs") {
  RandomStream rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 40, p = 4;
    const Eigen::MatrixXd X = random_matrix(rng, n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.next_normal();
    const auto d = raw_design(X, y);
    const auto fit = ols_fit(d);
    const auto cov = robust_covariance(d, fit.residuals, CovType::hc0);

    oracles::Matrix Xo(n, std::vector<double>(p));
    std::vector<double> eo(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      eo[static_cast<std::size_t>(i)] = fit.residuals(i);
      for (Eigen::Index c = 0; c < p; ++c) Xo[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = X(i, c);
    }
    const auto expect = oracles::sandwich_hc0(Xo, eo);
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b < p; ++b)
        CHECK(cov(a, b) == doctest::Approx(expect[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]).epsilon(1e-10));
  }
}

TEST_CASE("perfect fit gives a zero covariance") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3;
  Eigen::VectorXd y = X * Eigen::Vector2d(0.2, 0.1);
  const auto d = raw_design(X, y);
  const auto fit = ols_fit(d);
  const auto cov = robust_covariance(d, fit.residuals, CovType::hc0);
  CHECK(cov.cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("HC1 is the degrees-of-freedom scaled HC0") {
  RandomStream rng(23);
  const Eigen::MatrixXd X = random_matrix(rng, 30, 3);
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y(i) = rng.next_normal();
  const auto d = raw_design(X, y);
  const auto fit = ols_fit(d);
  const auto hc0 = robust_covariance(d, fit.residuals, CovType::hc0);
  const auto hc1 = robust_covariance(d, fit.residuals, CovType::hc1);
  CHECK(hc1(1, 1) == doctest::Approx(hc0(1, 1) * 30.0 / 27.0).epsilon(1e-12));
}

TEST_CASE("cluster covariance with singleton clusters equals HC0") {
  RandomStream rng(29);
  const Eigen::MatrixXd X = random_matrix(rng, 25, 3);
  Eigen::VectorXd y(25);
  for (Eigen::Index i = 0; i < 25; ++i) y(i) = rng.next_normal();
  const auto d = raw_design(X, y);
  const auto fit = ols_fit(d);
  std::vector<int> singletons(25);
  for (int i = 0; i < 25; ++i) singletons[static_cast<std::size_t>(i)] = i;
  const auto cl = robust_covariance(d, fit.residuals, CovType::cluster, &singletons);
  const auto hc0 = robust_covariance(d, fit.residuals, CovType::hc0);
  CHECK((cl - hc0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("robust covariance is symmetric positive semidefinite") {
  RandomStream rng(31);
  const Eigen::MatrixXd X = random_matrix(rng, 60, 5);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) y(i) = rng.next_normal() * (1 + X(i, 1) * X(i, 1));
  const auto d = raw_design(X, y);
  const auto fit = ols_fit(d);
  const auto cov = robust_covariance(d, fit.residuals, CovType::hc1);
  CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * cov.trace());
}

TEST_CASE("wald intervals and p-values") {
  const auto w = wald(0.25, 0.0, 0.90);
  CHECK(w.lower == 0.25);
  CHECK(w.upper == 0.25);
  CHECK(w.reject_zero);
  CHECK(w.p_value == 0.0);

  const auto z = wald(0.0, 1.0, 0.90);
  CHECK(z.lower == doctest::Approx(-1.6448536269514722).epsilon(1e-10));
  CHECK(z.upper == doctest::Approx(+1.6448536269514722).epsilon(1e-10));
  CHECK(!z.reject_zero);
  CHECK(z.p_value == doctest::Approx(1.0));

  const auto degenerate = wald(0.0, 0.0, 0.90);
  CHECK(degenerate.p_value == 1.0);
  CHECK(!degenerate.reject_zero);

  CHECK_THROWS_AS(wald(0.1, 0.2, 1.5), Error);
  CHECK_THROWS_AS(wald(0.1, -0.1, 0.9), Error);
}

TEST_CASE("reject_zero agrees with the interval containing zero") {
  RandomStream rng(37);
  for (int i = 0; i < 200; ++i) {
    const double est = 2 * rng.next_uniform() - 1;
    const double se = rng.next_uniform();
    const double level = 0.5 + 0.49 * rng.next_uniform();
    const auto w = wald(est, se, level);
    CHECK(w.reject_zero == (0.0 < w.lower || 0.0 > w.upper));
    CHECK(w.lower <= w.upper);
  }
}

TEST_CASE("scale equivariance: y*c scales estimates and SEs by c") {
  RandomStream rng(41);
  const Eigen::MatrixXd X = random_matrix(rng, 80, 4);
  Eigen::VectorXd y(80);
  for (Eigen::Index i = 0; i < 80; ++i) y(i) = 0.5 * X(i, 1) + 0.2 * rng.next_normal();
  const double c = 3.5;

  const auto d1 = raw_design(X, y);
  const auto f1 = ols_fit(d1);
  const auto cov1 = robust_covariance(d1, f1.residuals, CovType::hc1);
  const auto d2 = raw_design(X, (c * y).eval());
  const auto f2 = ols_fit(d2);
  const auto cov2 = robust_covariance(d2, f2.residuals, CovType::hc1);

  for (Eigen::Index k = 0; k < 4; ++k) {
    CHECK(f2.coefficients(k) == doctest::Approx(c * f1.coefficients(k)).epsilon(1e-10));
    CHECK(std::sqrt(cov2(k, k)) == doctest::Approx(c * std::sqrt(cov1(k, k))).epsilon(1e-10));
    const auto w1 = wald(f1.coefficients(k), std::sqrt(cov1(k, k)));
    const auto w2 = wald(f2.coefficients(k), std::sqrt(cov2(k, k)));
    CHECK(w1.reject_zero == w2.reject_zero);
  }
}

// ---- ordinal ------------------------------------------------------------

namespace {

DesignMatrix ordinal_design(const Eigen::MatrixXd& X) {
  DesignMatrix d;
  d.X = X;
  d.y = Eigen::VectorXd::Zero(X.rows());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    ColumnMeta m;
    m.kind = ColumnKind::self_bias;
    m.judge_id = "x" + std::to_string(c);
    d.columns.push_back(m);
  }
  d.row_keys.resize(static_cast<std::size_t>(X.rows()));
  return d;
}

}  // namespace

TEST_CASE("covariate-free cutpoints reproduce the empirical logits") {
  // 25/50/25 split over three levels.
  std::vector<int> levels;
  for (int i = 0; i < 25; ++i) levels.push_back(1);
  for (int i = 0; i < 50; ++i) levels.push_back(2);
  for (int i = 0; i < 25; ++i) levels.push_back(3);
  // Covariate-free model: p = 0 columns, only cutpoints.
  DesignMatrix d;
  d.X = Eigen::MatrixXd::Zero(100, 0);
  d.y = Eigen::VectorXd::Zero(100);
  d.row_keys.resize(100);
  const auto fit = ordinal_fit(d, levels, 3);
  CHECK(fit.converged);
  CHECK(fit.cutpoints(0) == doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-6));
  CHECK(fit.cutpoints(1) == doctest::Approx(std::log(0.75 / 0.25)).epsilon(1e-6));
  CHECK(fit.cutpoints(0) == doctest::Approx(-1.0986).epsilon(1e-3));
}

TEST_CASE("binary single-covariate fit equals the 2x2 log odds ratio") {
  // x=0: 30 of level 1, 20 of level 2; x=1: 10 of level 1, 40 of level 2.
  std::vector<int> levels;
  std::vector<double> xs;
  for (int i = 0; i < 30; ++i) { levels.push_back(1); xs.push_back(0); }
  for (int i = 0; i < 20; ++i) { levels.push_back(2); xs.push_back(0); }
  for (int i = 0; i < 10; ++i) { levels.push_back(1); xs.push_back(1); }
  for (int i = 0; i < 40; ++i) { levels.push_back(2); xs.push_back(1); }
  Eigen::MatrixXd X(100, 1);
  for (int i = 0; i < 100; ++i) X(i, 0) = xs[static_cast<std::size_t>(i)];

  const auto fit = ordinal_fit(ordinal_design(X), levels, 2);
  CHECK(fit.converged);
  // Odds of level 2: (40/10) vs (20/30); log OR = log(6).
  const double lor = std::log((40.0 / 10.0) / (20.0 / 30.0));
  CHECK(fit.coefficients(0) == doctest::Approx(lor).epsilon(1e-6));
}

TEST_CASE("positive coefficients mean higher ratings") {
  // Latent y* = 1.5 x + logistic noise, discretized: b should be ~ +1.5.
  RandomStream rng(43);
  const int n = 4000;
  Eigen::MatrixXd X(n, 1);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_uniform();
    X(i, 0) = x;
    const double ystar = 1.5 * x + rng.next_logistic();
    levels[static_cast<std::size_t>(i)] = ystar < 0.2 ? 1 : ystar < 1.2 ? 2 : 3;
  }
  const auto fit = ordinal_fit(ordinal_design(X), levels, 3);
  CHECK(fit.converged);
  CHECK(fit.coefficients(0) > 0.5);
  // Higher x must shift predicted mass upward.
  Eigen::MatrixXd lo(1, 1), hi(1, 1);
  lo << 0.1;
  hi << 0.9;
  const auto plo = ordinal_predicted_probs(fit, lo, 3);
  const auto phi = ordinal_predicted_probs(fit, hi, 3);
  CHECK(phi(0, 2) > plo(0, 2));
}

TEST_CASE("gradient at the ordinal fit optimum is tiny") {
  RandomStream rng(47);
  const int n = 500;
  Eigen::MatrixXd X(n, 2);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.next_uniform();
    X(i, 1) = (i % 2 == 0) ? 1.0 : 0.0;
    const double ystar = 0.8 * X(i, 0) + 0.3 * X(i, 1) + rng.next_logistic();
    levels[static_cast<std::size_t>(i)] = ystar < 0 ? 1 : ystar < 1 ? 2 : ystar < 2 ? 3 : 4;
  }
  const auto fit = ordinal_fit(ordinal_design(X), levels, 4);
  CHECK(fit.converged);
  CHECK(fit.iterations <= 100);
  // Cutpoints strictly increasing.
  for (Eigen::Index k = 1; k < fit.cutpoints.size(); ++k)
    CHECK(fit.cutpoints(k) > fit.cutpoints(k - 1));
}

TEST_CASE("binary fits match aggregate frequencies exactly") {
  // With a logit link and free cutpoint, predicted counts match observed for
  // K=2 designs that include per-group indicators.
  RandomStream rng(53);
  const int n = 600;
  Eigen::MatrixXd X(n, 2);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = (i % 3 == 0) ? 1.0 : 0.0;  // judge indicator
    X(i, 1) = rng.next_uniform();
    const double ystar = 0.7 * X(i, 0) + 0.5 * X(i, 1) + rng.next_logistic();
    levels[static_cast<std::size_t>(i)] = ystar < 0.5 ? 1 : 2;
  }
  const auto fit = ordinal_fit(ordinal_design(X), levels, 2);
  REQUIRE(fit.converged);
  const auto P = ordinal_predicted_probs(fit, X, 2);
  double pred1 = 0, obs1 = 0;
  for (int i = 0; i < n; ++i) {
    pred1 += P(i, 0);
    obs1 += levels[static_cast<std::size_t>(i)] == 1 ? 1 : 0;
  }
  CHECK(std::abs(pred1 - obs1) / n < 1e-4);
}

TEST_CASE("covariate-free predicted frequencies equal observed exactly") {
  std::vector<int> levels;
  for (int i = 0; i < 13; ++i) levels.push_back(1);
  for (int i = 0; i < 37; ++i) levels.push_back(2);
  for (int i = 0; i < 29; ++i) levels.push_back(3);
  for (int i = 0; i < 21; ++i) levels.push_back(4);
  DesignMatrix d;
  d.X = Eigen::MatrixXd::Zero(100, 0);
  d.y = Eigen::VectorXd::Zero(100);
  d.row_keys.resize(100);
  const auto fit = ordinal_fit(d, levels, 4);
  REQUIRE(fit.converged);
  const auto P = ordinal_predicted_probs(fit, d.X, 4);
  Eigen::VectorXd pred = P.colwise().sum();
  CHECK(pred(0) == doctest::Approx(13).epsilon(1e-4));
  CHECK(pred(1) == doctest::Approx(37).epsilon(1e-4));
  CHECK(pred(2) == doctest::Approx(29).epsilon(1e-4));
  CHECK(pred(3) == doctest::Approx(21).epsilon(1e-4));
}

TEST_CASE("intercept columns are rejected in ordinal designs") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 1);
  DesignMatrix d;
  d.X = X;
  d.y = Eigen::VectorXd::Zero(10);
  ColumnMeta m;
  m.kind = ColumnKind::intercept;
  d.columns.push_back(m);
  d.row_keys.resize(10);
  std::vector<int> levels{1, 2, 1, 2, 1, 2, 1, 2, 1, 2};
  CHECK_THROWS_WITH_AS(ordinal_fit(d, levels, 2), doctest::Contains("intercept"), Error);
}

TEST_CASE("complete separation raises an error naming the column") {
  // x perfectly separates the two levels.
  const int n = 60;
  Eigen::MatrixXd X(n, 1);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i < n / 2 ? 0.0 : 1.0;
    levels[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : 2;
  }
  CHECK_THROWS_WITH_AS(ordinal_fit(ordinal_design(X), levels, 2),
                       doctest::Contains("separation"), Error);
}

TEST_CASE("fewer than two observed levels is an error") {
  Eigen::MatrixXd X(10, 1);
  X.setLinSpaced(10, 0, 1);
  std::vector<int> levels(10, 2);
  CHECK_THROWS_WITH_AS(ordinal_fit(ordinal_design(X), levels, 3),
                       doctest::Contains("2 observed levels"), Error);
}

TEST_CASE("ordinal sandwich variance is positive for slope coefficients") {
  RandomStream rng(59);
  const int n = 800;
  Eigen::MatrixXd X(n, 1);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.next_uniform();
    const double ystar = 0.4 * X(i, 0) + rng.next_logistic();
    levels[static_cast<std::size_t>(i)] = ystar < 0 ? 1 : ystar < 1 ? 2 : 3;
  }
  const auto fit = ordinal_fit(ordinal_design(X), levels, 3);
  REQUIRE(fit.converged);
  CHECK(fit.coef_variance(0) > 0);
}
