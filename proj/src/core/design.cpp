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

#include "core/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/numeric.hpp"

namespace judgebias {

namespace {

constexpr const char* kModule = "design";
constexpr double kRankTolerance = 1e-10;

struct FitRow {
  const RatingRow* row;
  double reference;
};

/// Judge rows eligible for fitting: non-NA value and a reference score.
std::vector<FitRow> select_fit_rows(const RatingsTable& table, long* excluded) {
  std::vector<FitRow> out;
  long skipped = 0;
  for (const auto& r : table.rows) {
    if (r.rater_kind != RaterKind::llm_judge) continue;
    if (r.is_na()) {
      ++skipped;
      continue;
    }
    const auto it = table.reference.find({r.prompt_id, r.dimension_id, r.model_id});
    if (it == table.reference.end()) {
      ++skipped;
      continue;
    }
    out.push_back({&r, it->second});
  }
  if (excluded) *excluded = skipped;
  return out;
}

std::vector<std::string> present_ids(const std::vector<FitRow>& rows,
                                     const std::vector<std::string>& canonical,
                                     bool judges) {
  std::set<std::string> seen;
  for (const auto& fr : rows) seen.insert(judges ? fr.row->rater_id : fr.row->model_id);
  std::vector<std::string> out;
  for (const auto& id : canonical)
    if (seen.count(id)) out.push_back(id);
  return out;
}

std::string pick_baseline(const std::vector<std::string>& ids,
                          const std::optional<std::string>& requested,
                          const char* what) {
  if (requested) {
    if (std::find(ids.begin(), ids.end(), *requested) == ids.end())
      fail(kModule, std::string("baseline ") + what + " '" + *requested + "' not present");
    return *requested;
  }
  return *std::min_element(ids.begin(), ids.end());
}

/// Candidate column: metadata plus its value on each fit row.
struct Candidate {
  ColumnMeta meta;
  Eigen::VectorXd values;
};

/// Drop all-zero candidates, then enforce full column rank by removing the
/// columns a pivoted QR marks as dependent.
DesignMatrix assemble(std::vector<Candidate> candidates, Eigen::VectorXd y,
                      std::vector<RowKey> keys, long excluded,
                      std::vector<std::string> dropped) {
  const auto n = y.size();
  std::vector<Candidate> kept;
  for (auto& c : candidates) {
    if (c.values.cwiseAbs().maxCoeff() == 0.0) {
      dropped.push_back(c.meta.name());
    } else {
      kept.push_back(std::move(c));
    }
  }
  if (kept.empty()) fail(kModule, "design has no usable columns");

  while (true) {
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = kept[c].values;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(kRankTolerance);
    const auto rank = qr.rank();
    if (rank == X.cols()) {
      DesignMatrix d;
      d.X = std::move(X);
      d.y = std::move(y);
      for (auto& c : kept) d.columns.push_back(std::move(c.meta));
      d.row_keys = std::move(keys);
      d.dropped_columns = std::move(dropped);
      d.excluded_rows = excluded;
      return d;
    }
    // The trailing pivots identify dependent columns; drop them and retry.
    const auto& perm = qr.colsPermutation().indices();
    std::set<std::size_t> to_drop;
    for (Eigen::Index k = rank; k < X.cols(); ++k)
      to_drop.insert(static_cast<std::size_t>(perm(k)));
    std::vector<Candidate> next;
    for (std::size_t c = 0; c < kept.size(); ++c) {
      if (to_drop.count(c))
        dropped.push_back(kept[c].meta.name() + " (collinear)");
      else
        next.push_back(std::move(kept[c]));
    }
    if (next.size() == kept.size()) fail(kModule, "rank repair failed to make progress");
    kept = std::move(next);
    if (kept.empty()) fail(kModule, "design has no usable columns after rank repair");
  }
}

std::vector<Candidate> fixed_effect_candidates(const std::vector<std::string>& ids,
                                               const std::string& baseline, Coding coding,
                                               ColumnKind kind,
                                               const std::vector<std::string>& row_ids) {
  const auto n = static_cast<Eigen::Index>(row_ids.size());
  std::vector<Candidate> out;
  if (ids.size() < 2) return out;
  if (coding == Coding::reference) {
    for (const auto& id : ids) {
      if (id == baseline) continue;
      Candidate c;
      c.meta.kind = kind;
      if (kind == ColumnKind::judge_fe)
        c.meta.judge_id = id;
      else
        c.meta.dimension_id = id;
      c.values = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (row_ids[static_cast<std::size_t>(i)] == id) c.values(i) = 1.0;
      out.push_back(std::move(c));
    }
  } else {
    // Sum-to-zero: one column per non-final id, the final id coded -1 in all.
    const std::string& last = ids.back();
    for (const auto& id : ids) {
      if (id == last) continue;
      Candidate c;
      c.meta.kind = kind;
      if (kind == ColumnKind::judge_fe)
        c.meta.judge_id = id;
      else
        c.meta.dimension_id = id;
      c.values = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rid = row_ids[static_cast<std::size_t>(i)];
        if (rid == id)
          c.values(i) = 1.0;
        else if (rid == last)
          c.values(i) = -1.0;
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<Candidate> core_candidates(const RatingsTable& table,
                                       const std::vector<FitRow>& rows,
                                       const BuildOptions& opts, bool with_judge_slopes) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto& config = table.config;

  const auto judges = present_ids(rows, config.judges, /*judges=*/true);
  std::vector<std::string> row_judges(rows.size()), row_dims(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    row_judges[i] = rows[i].row->rater_id;
    row_dims[i] = rows[i].row->dimension_id;
  }

  std::vector<Candidate> candidates;
  if (opts.intercept) {
    Candidate c;
    c.meta.kind = ColumnKind::intercept;
    c.values = Eigen::VectorXd::Ones(n);
    candidates.push_back(std::move(c));
  }

  if (judges.size() >= 2) {
    const std::string baseline = pick_baseline(judges, opts.baseline_judge, "judge");
    auto fes = fixed_effect_candidates(judges, baseline, opts.coding, ColumnKind::judge_fe,
                                       row_judges);
    for (auto& c : fes) candidates.push_back(std::move(c));
  }

  if (with_judge_slopes) {
    for (const auto& j : judges) {
      Candidate c;
      c.meta.kind = ColumnKind::judge_slope;
      c.meta.judge_id = j;
      c.values = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (rows[static_cast<std::size_t>(i)].row->rater_id == j)
          c.values(i) = rows[static_cast<std::size_t>(i)].reference;
      candidates.push_back(std::move(c));
    }
  }

  // Self-bias: one indicator per judge that is also a model.
  for (const auto& j : judges) {
    if (!config.has_model(j)) continue;
    Candidate c;
    c.meta.kind = ColumnKind::self_bias;
    c.meta.judge_id = j;
    c.values = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = *rows[static_cast<std::size_t>(i)].row;
      if (r.rater_id == j && r.model_id == j) c.values(i) = 1.0;
    }
    candidates.push_back(std::move(c));
  }

  if (opts.include_family) {
    // Families with a judge and at least one distinct model of the same family.
    std::set<std::string> eligible;
    for (const auto& j : judges) {
      const auto& fj = config.family(j);
      for (const auto& m : config.models)
        if (m != j && config.family(m) == fj) eligible.insert(fj);
    }
    for (const auto& fam : eligible) {
      Candidate c;
      c.meta.kind = ColumnKind::family_bias;
      c.meta.family_id = fam;
      c.values = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = *rows[static_cast<std::size_t>(i)].row;
        // The self case never activates family bias.
        if (r.rater_id != r.model_id && config.family(r.rater_id) == fam &&
            config.family(r.model_id) == fam)
          c.values(i) = 1.0;
      }
      candidates.push_back(std::move(c));
    }
  }

  if (opts.dimension_fe) {
    std::set<std::string> dim_set(row_dims.begin(), row_dims.end());
    std::vector<std::string> dims(dim_set.begin(), dim_set.end());
    if (dims.size() >= 2) {
      const std::string baseline = pick_baseline(dims, opts.baseline_dimension, "dimension");
      auto fes = fixed_effect_candidates(dims, baseline, opts.coding, ColumnKind::dimension_fe,
                                         row_dims);
      for (auto& c : fes) candidates.push_back(std::move(c));
    }
  }
  return candidates;
}

DesignMatrix build_impl(const RatingsTable& table, const BuildOptions& opts,
                        int gam_interior_knots, bool gam) {
  if (table.config.overlap_judges().empty())
    fail(kModule, "no judge-model overlap; self-bias is not estimable");

  long excluded = 0;
  const auto rows = select_fit_rows(table, &excluded);
  if (rows.empty()) fail(kModule, "no judge rows with reference scores");

  auto candidates = core_candidates(table, rows, opts, /*with_judge_slopes=*/!gam);

  if (gam) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = rows[static_cast<std::size_t>(i)].reference;
    const SplineBasis sb = spline_basis(s, gam_interior_knots);

    const auto judges = present_ids(rows, table.config.judges, /*judges=*/true);
    // Insert judge x basis interactions where the slopes would have gone:
    // after the judge fixed effects, before self/family/dimension columns.
    std::size_t at = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const auto kind = candidates[c].meta.kind;
      if (kind == ColumnKind::self_bias || kind == ColumnKind::family_bias ||
          kind == ColumnKind::dimension_fe) {
        at = c;
        break;
      }
    }
    std::vector<Candidate> splines;
    for (const auto& j : judges) {
      for (Eigen::Index b = 0; b < sb.basis.cols(); ++b) {
        Candidate sc;
        sc.meta.kind = ColumnKind::spline_basis;
        sc.meta.judge_id = j;
        sc.meta.basis_index = static_cast<int>(b);
        sc.values = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
          if (rows[static_cast<std::size_t>(i)].row->rater_id == j)
            sc.values(i) = sb.basis(i, b);
        splines.push_back(std::move(sc));
      }
    }
    candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(at),
                      std::make_move_iterator(splines.begin()),
                      std::make_move_iterator(splines.end()));
  }

  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  std::vector<RowKey> keys;
  keys.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = *rows[i].row->value;
    keys.push_back({rows[i].row->prompt_id, rows[i].row->dimension_id, rows[i].row->model_id,
                    rows[i].row->rater_id});
  }
  return assemble(std::move(candidates), std::move(y), std::move(keys), excluded, {});
}

}  // namespace

const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::intercept: return "intercept";
    case ColumnKind::judge_fe: return "judge_fe";
    case ColumnKind::judge_slope: return "judge_slope";
    case ColumnKind::self_bias: return "self_bias";
    case ColumnKind::family_bias: return "family_bias";
    case ColumnKind::dimension_fe: return "dimension_fe";
    case ColumnKind::length_ctrl: return "length";
    case ColumnKind::spline_basis: return "spline";
  }
  return "?";
}

std::string ColumnMeta::name() const {
  std::string out = to_string(kind);
  switch (kind) {
    case ColumnKind::intercept:
      break;
    case ColumnKind::judge_fe:
    case ColumnKind::judge_slope:
    case ColumnKind::self_bias:
      out += "[" + judge_id + "]";
      break;
    case ColumnKind::family_bias:
      out += "[" + family_id + "]";
      break;
    case ColumnKind::dimension_fe:
      out += "[" + dimension_id + "]";
      break;
    case ColumnKind::length_ctrl:
      out += "[" + (judge_id.empty() ? std::string("shared") : judge_id) + "]";
      break;
    case ColumnKind::spline_basis:
      out += "[" + judge_id + "," + std::to_string(basis_index) + "]";
      break;
  }
  return out;
}

int DesignMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name() == name) return static_cast<int>(i);
  return -1;
}

DesignMatrix build_design(const RatingsTable& table, const BuildOptions& opts) {
  return build_impl(table, opts, 0, /*gam=*/false);
}

DesignMatrix build_gam_design(const RatingsTable& table, int num_interior_knots,
                              const BuildOptions& opts) {
  return build_impl(table, opts, num_interior_knots, /*gam=*/true);
}

std::map<std::pair<std::string, std::string>, double> compute_length_features(
    const RatingsTable& table, LengthNormalization mode) {
  // One length per (prompt, model); consistency was checked at load.
  std::map<std::string, std::map<std::string, double>> by_prompt;
  for (const auto& r : table.rows)
    if (r.rater_kind == RaterKind::llm_judge && r.token_length)
      by_prompt[r.prompt_id][r.model_id] = static_cast<double>(*r.token_length);

  // Every judged (prompt, model) must have a length.
  std::set<std::string> missing;
  for (const auto& r : table.rows) {
    if (r.rater_kind != RaterKind::llm_judge || r.token_length) continue;
    const auto pit = by_prompt.find(r.prompt_id);
    if (pit == by_prompt.end() || !pit->second.count(r.model_id)) missing.insert(r.prompt_id);
  }
  if (!missing.empty()) {
    std::string list;
    int shown = 0;
    for (const auto& p : missing) {
      if (shown++ == 5) {
        list += ", ...";
        break;
      }
      list += (list.empty() ? "" : ", ") + p;
    }
    fail(kModule, "token_length missing for prompts: " + list);
  }

  double gmean = 0, gvar = 0;
  if (mode == LengthNormalization::global) {
    long count = 0;
    for (const auto& [prompt, models] : by_prompt)
      for (const auto& [m, l] : models) {
        gmean += l;
        ++count;
      }
    gmean /= static_cast<double>(count);
    for (const auto& [prompt, models] : by_prompt)
      for (const auto& [m, l] : models) gvar += (l - gmean) * (l - gmean);
    gvar /= static_cast<double>(count);
  }

  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [prompt, models] : by_prompt) {
    double mean = gmean, var = gvar;
    if (mode == LengthNormalization::per_prompt) {
      mean = 0;
      for (const auto& [m, l] : models) mean += l;
      mean /= static_cast<double>(models.size());
      var = 0;
      for (const auto& [m, l] : models) var += (l - mean) * (l - mean);
      var /= static_cast<double>(models.size());
    }
    for (const auto& [m, l] : models) {
      const double z = var > 0 ? (l - mean) / std::sqrt(var) : 0.0;
      out[{prompt, m}] = std::tanh(z);
    }
  }
  return out;
}

DesignMatrix add_length_control(
    DesignMatrix design,
    const std::map<std::pair<std::string, std::string>, double>& features, bool per_judge) {
  const auto n = design.n();
  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& k = design.row_keys[static_cast<std::size_t>(i)];
    const auto it = features.find({k.prompt_id, k.model_id});
    if (it == features.end())
      fail(kModule, "length features do not cover row (" + k.prompt_id + ", " + k.model_id + ")");
    f(i) = it->second;
  }

  std::vector<Candidate> candidates;
  for (std::size_t c = 0; c < design.columns.size(); ++c)
    candidates.push_back({design.columns[c], design.X.col(static_cast<Eigen::Index>(c))});

  if (per_judge) {
    std::set<std::string> judge_set;
    for (const auto& k : design.row_keys) judge_set.insert(k.judge_id);
    for (const auto& j : judge_set) {
      Candidate c;
      c.meta.kind = ColumnKind::length_ctrl;
      c.meta.judge_id = j;
      c.values = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (design.row_keys[static_cast<std::size_t>(i)].judge_id == j) c.values(i) = f(i);
      candidates.push_back(std::move(c));
    }
  } else {
    Candidate c;
    c.meta.kind = ColumnKind::length_ctrl;
    c.values = f;
    candidates.push_back(std::move(c));
  }
  return assemble(std::move(candidates), std::move(design.y), std::move(design.row_keys),
                  design.excluded_rows, std::move(design.dropped_columns));
}

SplineBasis spline_basis(const Eigen::VectorXd& s_values, int num_interior_knots) {
  if (num_interior_knots < 0) fail(kModule, "negative knot count");
  std::vector<double> sorted(s_values.data(), s_values.data() + s_values.size());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.front() == sorted.back())
    fail(kModule, "degenerate smooth: fewer than 2 distinct values");

  std::vector<double> knots{sorted.front()};
  for (int k = 1; k <= num_interior_knots; ++k) {
    const double q = static_cast<double>(k) / static_cast<double>(num_interior_knots + 1);
    knots.push_back(quantile_sorted(sorted, q));
  }
  knots.push_back(sorted.back());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  SplineBasis out;
  out.knots = knots;
  out.basis = spline_basis_at(knots, s_values);
  return out;
}

Eigen::MatrixXd spline_basis_at(const std::vector<double>& knots, const Eigen::VectorXd& s) {
  // Truncated-power natural cubic spline: N1 = x, N_{k+1} = d_k - d_{K-1},
  // d_k(x) = [(x - t_k)_+^3 - (x - t_K)_+^3] / (t_K - t_k). Linear beyond the
  // boundary knots; K knots give K-1 columns (intercept excluded).
  const auto K = knots.size();
  if (K < 2) fail(kModule, "spline needs at least 2 knots");
  const auto n = s.size();
  const double t_last = knots[K - 1];
  const auto cube_plus = [](double v) { return v > 0 ? v * v * v : 0.0; };
  const auto d = [&](std::size_t k, double x) {
    return (cube_plus(x - knots[k]) - cube_plus(x - t_last)) / (t_last - knots[k]);
  };
  Eigen::MatrixXd B(n, static_cast<Eigen::Index>(K - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = s(i);
    B(i, 0) = x;
    for (std::size_t k = 0; k + 2 < K; ++k)
      B(i, static_cast<Eigen::Index>(k + 1)) = d(k, x) - d(K - 2, x);
  }
  return B;
}

void write_design_csv(const DesignMatrix& design, const std::string& path) {
  std::ostringstream out;
  out << "prompt_id,dimension,model,judge,y";
  for (const auto& c : design.columns) out << ',' << csv_quote(c.name(), ',');
  out << "\n";
  for (Eigen::Index i = 0; i < design.n(); ++i) {
    const auto& k = design.row_keys[static_cast<std::size_t>(i)];
    out << csv_quote(k.prompt_id, ',') << ',' << csv_quote(k.dimension_id, ',') << ','
        << csv_quote(k.model_id, ',') << ',' << csv_quote(k.judge_id, ',') << ','
        << format_double(design.y(i));
    for (Eigen::Index c = 0; c < design.p(); ++c) out << ',' << format_double(design.X(i, c));
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

}  // namespace judgebias
