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

// Independent oracles used only by tests: plain-loop implementations that
// deliberately avoid the library's code paths (no Eigen decompositions, no
// shared helpers), so agreement between the two is meaningful.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracles {

using Matrix = std::vector<std::vector<double>>;

/// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Invert a matrix by Gauss-Jordan elimination.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

/// OLS coefficients through the explicit normal equations (X'X) b = X'y.
inline std::vector<double> normal_equations_ols(const Matrix& X, const std::vector<double>& y) {
  const std::size_t n = X.size(), p = X[0].size();
  Matrix xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += X[i][a] * y[i];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  return gauss_solve(xtx, xty);
}

/// Hand-expanded HC0 sandwich: (X'X)^-1 [sum e_i^2 x_i x_i'] (X'X)^-1.
inline Matrix sandwich_hc0(const Matrix& X, const std::vector<double>& e) {
  const std::size_t n = X.size(), p = X[0].size();
  Matrix xtx(p, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += X[i][a] * X[i][b];
  const Matrix bread = invert(xtx);
  Matrix meat(p, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) meat[a][b] += e[i] * e[i] * X[i][a] * X[i][b];
  Matrix tmp(p, std::vector<double>(p, 0.0)), out(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t c = 0; c < p; ++c) tmp[a][b] += bread[a][c] * meat[c][b];
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t c = 0; c < p; ++c) out[a][b] += tmp[a][c] * bread[c][b];
  return out;
}

/// Krippendorff's alpha by exhaustive enumeration of pairable value pairs.
/// metric_interval=false gives the ordinal (cumulative rank) difference.
inline double krippendorff_enumeration(const std::vector<std::vector<double>>& items,
                                       bool metric_interval) {
  std::vector<const std::vector<double>*> units;
  for (const auto& u : items)
    if (u.size() >= 2) units.push_back(&u);

  // Marginals over pairable values (needed by the ordinal metric).
  std::vector<double> values;
  for (const auto* u : units)
    for (double v : *u) values.push_back(v);
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> marginal(distinct.size(), 0.0);
  for (const auto* u : units) {
    const double w = 1.0 / (static_cast<double>(u->size()) - 1.0);
    for (double v : *u)
      for (std::size_t k = 0; k < distinct.size(); ++k)
        if (distinct[k] == v) marginal[k] += w * (static_cast<double>(u->size()) - 1.0);
  }
  // marginal[k] counts pairable values of category k (each value pairs with
  // m_u - 1 partners, weight 1/(m_u - 1) each -> contributes 1 per rating).

  const auto d2 = [&](double a, double b) {
    if (metric_interval) return (a - b) * (a - b);
    std::size_t ka = 0, kb = 0;
    for (std::size_t k = 0; k < distinct.size(); ++k) {
      if (distinct[k] == a) ka = k;
      if (distinct[k] == b) kb = k;
    }
    if (ka > kb) std::swap(ka, kb);
    double s = 0;
    for (std::size_t g = ka; g <= kb; ++g) s += marginal[g];
    s -= (marginal[ka] + marginal[kb]) / 2.0;
    return s * s;
  };

  double n = 0;
  for (const auto* u : units) n += static_cast<double>(u->size());

  double Do = 0;
  for (const auto* u : units) {
    const double mu = static_cast<double>(u->size());
    for (std::size_t a = 0; a < u->size(); ++a)
      for (std::size_t b = 0; b < u->size(); ++b)
        if (a != b) Do += d2((*u)[a], (*u)[b]) / (mu - 1.0);
  }
  Do /= n;

  double De = 0;
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = 0; b < values.size(); ++b)
      if (a != b) De += d2(values[a], values[b]);
  De /= n * (n - 1.0);

  if (De == 0) throw std::runtime_error("alpha undefined");
  return 1.0 - Do / De;
}

/// Natural cubic spline basis by direct evaluation of the truncated-power
/// form (basis functions linear beyond the boundary knots).
inline std::vector<double> natural_spline_row(const std::vector<double>& knots, double x) {
  const std::size_t K = knots.size();
  const auto pos3 = [](double v) { return v > 0 ? v * v * v : 0.0; };
  const auto dk = [&](std::size_t k) {
    return (pos3(x - knots[k]) - pos3(x - knots[K - 1])) / (knots[K - 1] - knots[k]);
  };
  std::vector<double> row;
  row.push_back(x);
  for (std::size_t k = 0; k + 2 < K; ++k) row.push_back(dk(k) - dk(K - 2));
  return row;
}

/// Standard normal quantile by bisection on the CDF (erfc based).
inline double normal_quantile_bisect(double p) {
  const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

/// Pearson correlation on midranks, written directly.
inline double spearman_midranks(std::vector<double> x, std::vector<double> y) {
  const auto rank = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double less = 0, equal = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) ++less;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = rank(x), ry = rank(y);
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracles
