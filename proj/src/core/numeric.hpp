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

#include <cstdint>
#include <string>
#include <vector>

namespace judgebias {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (inverse CDF), Wichura's AS 241 rational
/// approximation (full double precision). p must lie strictly in (0, 1).
double normal_quantile(double p);

/// Two-sided normal p-value for a t-statistic: 2 * (1 - Phi(|t|)).
double two_sided_p(double t);

/// Shortest decimal representation that round-trips to the same double.
/// Used for all numeric file output so diffs are byte-stable.
std::string format_double(double v);

/// Empirical quantile with linear interpolation between closest ranks
/// (the common "type 7" definition). `sorted` must be ascending, non-empty.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// splitmix64 step: advances `state` and returns the next 64-bit output.
/// A small, documented generator so streams can be reproduced elsewhere.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Deterministic random stream backed by splitmix64. Substreams for parallel
/// generation are derived by mixing a stream index into the seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  /// Substream `index` of a master seed; independent of draw order in other
  /// substreams.
  static RandomStream substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  /// Uniform in [0, 1) from the top 53 bits.
  double next_uniform();

  /// Uniform in the open interval (0, 1); never returns 0.
  double next_uniform_open();

  /// Standard normal via inverse-CDF transform of a uniform.
  double next_normal() { return normal_quantile(next_uniform_open()); }

  /// Normal(mean, sd) truncated to [lo, hi] by rejection sampling.
  double next_truncated_normal(double mean, double sd, double lo, double hi);

  /// Standard logistic via inverse CDF.
  double next_logistic();

 private:
  std::uint64_t state_;
};

}  // namespace judgebias
