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

#include "core/numeric.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "core/error.hpp"

namespace judgebias {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_sided_p(double t) { return std::erfc(std::abs(t) / std::sqrt(2.0)); }

namespace {

double polynomial(const double* coef, int n, double x) {
  // coef[0] is the constant term.
  double r = coef[n - 1];
  for (int i = n - 2; i >= 0; --i) r = r * x + coef[i];
  return r;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail("numeric", "normal_quantile requires p in (0,1)");

  // AS 241, PPND16 (Wichura 1988).
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3,  2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * polynomial(a, 8, r) / polynomial(b, 8, r);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = polynomial(c, 8, r) / polynomial(d, 8, r);
  } else {
    r -= 5.0;
    value = polynomial(e, 8, r) / polynomial(f, 8, r);
  }
  return q < 0 ? -value : value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail("numeric", "format_double failed");
  return std::string(buf, ptr);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail("numeric", "quantile of empty vector");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = h - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RandomStream RandomStream::substream(std::uint64_t seed, std::uint64_t index) {
  // One extra mixing round separates substreams from the master sequence.
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
  splitmix64_next(s);
  return RandomStream(s);
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_uniform_open() {
  double u;
  do {
    u = next_uniform();
  } while (u <= 0.0);
  return u;
}

double RandomStream::next_truncated_normal(double mean, double sd, double lo, double hi) {
  if (sd < 0) fail("numeric", "negative standard deviation");
  if (sd == 0) {
    if (mean < lo || mean > hi) fail("numeric", "degenerate truncated normal outside bounds");
    return mean;
  }
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double v = mean + sd * next_normal();
    if (v >= lo && v <= hi) return v;
  }
  fail("numeric", "truncated normal rejection sampling did not terminate");
}

double RandomStream::next_logistic() {
  const double u = next_uniform_open();
  return std::log(u / (1.0 - u));
}

}  // namespace judgebias
