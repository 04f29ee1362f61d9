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

#include "core/analyses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "core/dataset.hpp"
#include "core/error.hpp"

namespace judgebias {

namespace {

constexpr const char* kModule = "analyses";

BuildOptions to_build_options(const EstimateOptions& o) {
  BuildOptions b;
  b.include_family = o.include_family;
  b.dimension_fe = o.dimension_fe;
  b.coding = o.coding;
  return b;
}

std::vector<int> cluster_ids_by_completion(const std::vector<RowKey>& keys) {
  // Ratings of the same (prompt, model, judge) across dimensions form a cluster.
  std::map<std::tuple<std::string, std::string, std::string>, int> ids;
  std::vector<int> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    const auto key = std::make_tuple(k.prompt_id, k.model_id, k.judge_id);
    const auto [it, fresh] = ids.try_emplace(key, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

BiasReport report_from_fit(const DesignMatrix& design, const FitResult& fit,
                           const EstimateOptions& opts, std::string slice_label) {
  BiasReport rep;
  rep.slice_label = std::move(slice_label);
  rep.n = fit.n;
  rep.p = fit.p;
  rep.cov_type = to_string(opts.cov_type);
  rep.condition_number = fit.condition_number;
  rep.dropped_columns = design.dropped_columns;
  rep.excluded_rows = design.excluded_rows;

  for (std::size_t c = 0; c < fit.columns.size(); ++c) {
    const auto& meta = fit.columns[c];
    const double est = fit.coefficients(static_cast<Eigen::Index>(c));
    const double se = std::sqrt(std::max(0.0, fit.covariance(static_cast<Eigen::Index>(c),
                                                             static_cast<Eigen::Index>(c))));
    if (meta.kind == ColumnKind::self_bias)
      rep.self_bias[meta.judge_id] = wald(est, se, opts.level);
    else if (meta.kind == ColumnKind::family_bias)
      rep.family_bias[meta.family_id] = wald(est, se, opts.level);
    else if (meta.kind == ColumnKind::length_ctrl)
      rep.extra_terms[meta.name()] = wald(est, se, opts.level);
  }
  for (const auto& name : design.dropped_columns)
    if (name.rfind("self_bias", 0) == 0 || name.rfind("family_bias", 0) == 0)
      rep.not_estimable.push_back(name);
  return rep;
}

BiasReport fit_design(DesignMatrix design, const EstimateOptions& opts,
                      const std::string& slice_label) {
  FitResult fit = ols_fit(design);
  std::vector<int> clusters;
  const std::vector<int>* cluster_ptr = nullptr;
  if (opts.cov_type == CovType::cluster) {
    clusters = cluster_ids_by_completion(design.row_keys);
    cluster_ptr = &clusters;
  }
  fit.cov_type = opts.cov_type;
  fit.covariance = robust_covariance(design, fit.residuals, opts.cov_type, cluster_ptr);
  return report_from_fit(design, fit, opts, slice_label);
}

}  // namespace

BiasReport estimate_bias(const RatingsTable& table, const EstimateOptions& opts) {
  DesignMatrix design = build_design(table, to_build_options(opts));
  if (opts.length_control) {
    const auto features = compute_length_features(table, opts.length_mode);
    design = add_length_control(std::move(design), features, opts.length_per_judge);
  }
  return fit_design(std::move(design), opts, "all");
}

std::vector<BiasReport> slice_bias(const RatingsTable& table, SliceBy by,
                                   const EstimateOptions& opts) {
  std::vector<std::string> slices;
  if (by == SliceBy::dimension) {
    for (const auto& d : table.dimension_ids()) slices.push_back(d);
  } else {
    std::set<std::string> tasks;
    for (const auto& [p, t] : table.config.task_of) tasks.insert(t);
    if (tasks.empty()) fail(kModule, "no task types configured for task slicing");
    slices.assign(tasks.begin(), tasks.end());
  }

  std::vector<BiasReport> out;
  for (const auto& s : slices) {
    FilterSpec spec;
    if (by == SliceBy::dimension)
      spec.dimensions = std::set<std::string>{s};
    else
      spec.task_types = std::set<std::string>{s};
    const RatingsTable sliced = filter_table(table, spec);
    const std::string label = (by == SliceBy::dimension ? "dimension:" : "task:") + s;

    EstimateOptions sopts = opts;
    if (by == SliceBy::dimension) sopts.dimension_fe = false;
    try {
      DesignMatrix design = build_design(sliced, to_build_options(sopts));
      out.push_back(fit_design(std::move(design), sopts, label));
    } catch (const Error& e) {
      // A slice without usable rows is flagged, not fatal.
      BiasReport rep;
      rep.slice_label = label;
      rep.not_estimable.push_back(std::string("slice failed: ") + e.what());
      rep.converged = false;
      out.push_back(std::move(rep));
    }
  }
  return out;
}

BiasReport robustness_length(const RatingsTable& table, const EstimateOptions& opts) {
  EstimateOptions o = opts;
  o.length_control = true;
  o.length_per_judge = true;
  BiasReport rep = estimate_bias(table, o);
  rep.slice_label = "robustness:length";
  return rep;
}

std::vector<BiasReport> robustness_ordinal(const RatingsTable& table, double level) {
  std::vector<BiasReport> out;
  for (const auto& dim : table.dimension_ids()) {
    FilterSpec spec;
    spec.dimensions = std::set<std::string>{dim};
    const RatingsTable sliced = filter_table(table, spec);
    const std::string label = "robustness:ordinal:" + dim;
    const int K = sliced.scales.at(dim).num_levels;

    BiasReport rep;
    rep.slice_label = label;
    rep.cov_type = "sandwich";
    try {
      BuildOptions bopts;
      bopts.intercept = false;
      bopts.dimension_fe = false;
      DesignMatrix design = build_design(sliced, bopts);

      std::vector<int> levels;
      levels.reserve(design.row_keys.size());
      // Raw levels for the retained fit rows, in design row order.
      std::map<RowKey, int> level_of;
      for (const auto& r : sliced.rows)
        if (r.rater_kind == RaterKind::llm_judge && r.raw_level)
          level_of[{r.prompt_id, r.dimension_id, r.model_id, r.rater_id}] = *r.raw_level;
      bool missing_levels = false;
      std::vector<Eigen::Index> keep;
      for (std::size_t i = 0; i < design.row_keys.size(); ++i) {
        const auto it = level_of.find(design.row_keys[i]);
        if (it == level_of.end()) {
          missing_levels = true;
          continue;
        }
        keep.push_back(static_cast<Eigen::Index>(i));
        levels.push_back(it->second);
      }
      if (missing_levels && !keep.empty()) {
        DesignMatrix pruned;
        pruned.X.resize(static_cast<Eigen::Index>(keep.size()), design.X.cols());
        pruned.y.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
          pruned.X.row(static_cast<Eigen::Index>(i)) = design.X.row(keep[i]);
          pruned.y(static_cast<Eigen::Index>(i)) = design.y(keep[i]);
          pruned.row_keys.push_back(design.row_keys[static_cast<std::size_t>(keep[i])]);
        }
        pruned.columns = design.columns;
        pruned.dropped_columns = design.dropped_columns;
        pruned.excluded_rows =
            design.excluded_rows + static_cast<long>(design.row_keys.size() - keep.size());
        design = std::move(pruned);
      }

      const OrdinalFit fit = ordinal_fit(design, levels, K);
      rep.n = fit.n;
      rep.p = static_cast<int>(design.columns.size());
      rep.dropped_columns = design.dropped_columns;
      rep.excluded_rows = design.excluded_rows;
      rep.converged = fit.converged;
      for (std::size_t c = 0; c < fit.columns.size(); ++c) {
        const auto& meta = fit.columns[c];
        const double est = fit.coefficients(static_cast<Eigen::Index>(c));
        const double se = std::sqrt(std::max(0.0, fit.coef_variance(static_cast<int>(c))));
        if (meta.kind == ColumnKind::self_bias)
          rep.self_bias[meta.judge_id] = wald(est, se, level);
        else if (meta.kind == ColumnKind::family_bias)
          rep.family_bias[meta.family_id] = wald(est, se, level);
      }
      for (const auto& name : design.dropped_columns)
        if (name.rfind("self_bias", 0) == 0 || name.rfind("family_bias", 0) == 0)
          rep.not_estimable.push_back(name);
    } catch (const Error& e) {
      rep.not_estimable.push_back(std::string("slice failed: ") + e.what());
      rep.converged = false;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

BiasReport robustness_gam(const RatingsTable& table, int interior_knots,
                          const EstimateOptions& opts) {
  DesignMatrix design = build_gam_design(table, interior_knots, to_build_options(opts));
  BiasReport rep = fit_design(std::move(design), opts, "robustness:gam");
  return rep;
}

RatingsTable lofo_reference(const RatingsTable& table, const std::string& family) {
  std::vector<std::string> excluded_judges;
  for (const auto& j : table.config.judges)
    if (table.config.family(j) == family) excluded_judges.push_back(j);
  if (excluded_judges.empty()) fail(kModule, "family '" + family + "' has no judges");

  std::set<std::string> excluded_models;
  for (const auto& m : table.config.models)
    if (table.config.family(m) == family) excluded_models.insert(m);
  const std::set<std::string> excluded_judge_set(excluded_judges.begin(), excluded_judges.end());

  // Alternative reference: mean rating of the excluded family's judges.
  std::map<CellKey, std::pair<double, long>> acc;
  for (const auto& r : table.rows) {
    if (r.rater_kind != RaterKind::llm_judge || !excluded_judge_set.count(r.rater_id)) continue;
    if (excluded_models.count(r.model_id) || r.is_na()) continue;
    auto& a = acc[{r.prompt_id, r.dimension_id, r.model_id}];
    a.first += *r.value;
    a.second += 1;
  }

  RatingsTable out;
  out.scales = table.scales;
  out.config = table.config;
  std::erase_if(out.config.models,
                [&](const std::string& m) { return excluded_models.count(m) > 0; });
  std::erase_if(out.config.judges,
                [&](const std::string& j) { return excluded_judge_set.count(j) > 0; });
  if (out.config.models.empty() || out.config.judges.empty())
    fail(kModule, "excluding family '" + family + "' leaves no data to fit");

  for (const auto& r : table.rows) {
    if (r.rater_kind != RaterKind::llm_judge) continue;  // human rows are replaced
    if (excluded_judge_set.count(r.rater_id) || excluded_models.count(r.model_id)) continue;
    out.rows.push_back(r);
  }
  for (const auto& [cell, a] : acc) out.reference[cell] = a.first / static_cast<double>(a.second);

  // Cells no excluded-family judge rated are flagged; their rows drop out of
  // the fit because they carry no reference.
  for (const auto& r : out.rows) {
    const CellKey cell{r.prompt_id, r.dimension_id, r.model_id};
    if (!out.reference.count(cell)) out.cells_without_reference.insert(cell);
  }
  for (const auto& [cell, a] : acc)
    if (a.second < 2) out.cells_with_single_annotator.insert(cell);
  return out;
}

std::optional<double> krippendorff_alpha(const std::vector<std::vector<double>>& items,
                                         AlphaMetric metric) {
  // Units with fewer than 2 ratings are unpairable and ignored.
  std::vector<const std::vector<double>*> units;
  for (const auto& it : items)
    if (it.size() >= 2) units.push_back(&it);
  if (units.size() < 2) fail(kModule, "krippendorff_alpha needs >= 2 items with >= 2 ratings");

  // Value categories and coincidence matrix.
  std::map<double, int> value_index;
  for (const auto* u : units)
    for (double v : *u) value_index.emplace(v, 0);
  int idx = 0;
  for (auto& [v, i] : value_index) i = idx++;
  const int V = idx;
  std::vector<double> values(V);
  for (const auto& [v, i] : value_index) values[static_cast<std::size_t>(i)] = v;

  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(V, V);
  for (const auto* u : units) {
    const double mu = static_cast<double>(u->size());
    for (std::size_t a = 0; a < u->size(); ++a)
      for (std::size_t b = 0; b < u->size(); ++b) {
        if (a == b) continue;
        o(value_index.at((*u)[a]), value_index.at((*u)[b])) += 1.0 / (mu - 1.0);
      }
  }
  const Eigen::VectorXd nc = o.rowwise().sum();
  const double n = nc.sum();
  if (n <= 1) fail(kModule, "krippendorff_alpha: too few pairable values");

  // Squared difference function per metric.
  Eigen::MatrixXd d2(V, V);
  if (metric == AlphaMetric::interval) {
    for (int a = 0; a < V; ++a)
      for (int b = 0; b < V; ++b) {
        const double diff = values[static_cast<std::size_t>(a)] - values[static_cast<std::size_t>(b)];
        d2(a, b) = diff * diff;
      }
  } else {
    // Ordinal: squared difference of cumulative coincidence ranks.
    for (int a = 0; a < V; ++a)
      for (int b = 0; b < V; ++b) {
        const int lo = std::min(a, b), hi = std::max(a, b);
        double s = 0;
        for (int g = lo; g <= hi; ++g) s += nc(g);
        s -= (nc(lo) + nc(hi)) / 2.0;
        d2(a, b) = s * s;
      }
  }

  double Do = 0, De = 0;
  for (int a = 0; a < V; ++a)
    for (int b = 0; b < V; ++b) {
      Do += o(a, b) * d2(a, b);
      De += nc(a) * nc(b) * d2(a, b);
    }
  Do /= n;
  De /= n * (n - 1.0);
  if (De == 0) return std::nullopt;  // every rating identical: alpha undefined
  return 1.0 - Do / De;
}

std::optional<double> observed_agreement(const std::vector<std::vector<double>>& items) {
  long eligible = 0, unanimous = 0;
  for (const auto& it : items) {
    if (it.size() < 2) continue;
    ++eligible;
    if (std::all_of(it.begin(), it.end(), [&](double v) { return v == it.front(); })) ++unanimous;
  }
  if (eligible == 0) return std::nullopt;
  return static_cast<double>(unanimous) / static_cast<double>(eligible);
}

std::optional<double> spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(kModule, "spearman_rho needs vectors of equal length");
  const auto n = x.size();
  if (n < 2) fail(kModule, "spearman_rho needs at least 2 observations");

  const auto midranks = [](const std::vector<double>& v) {
    const auto n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
      i = j + 1;
    }
    return ranks;
  };

  const auto rx = midranks(x);
  const auto ry = midranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;  // constant vector
  return sxy / std::sqrt(sxx * syy);
}

GoldMetrics gold_accuracy(const std::map<CellKey, std::vector<double>>& annotations,
                          const std::map<CellKey, std::vector<double>>& gold) {
  GoldMetrics out;
  std::vector<double> mean_ann, mean_gold;
  for (const auto& [cell, gold_ratings] : gold) {
    if (gold_ratings.empty()) continue;
    const auto it = annotations.find(cell);
    if (it == annotations.end() || it->second.empty()) continue;
    const auto [gmin, gmax] = std::minmax_element(gold_ratings.begin(), gold_ratings.end());
    ++out.items;
    for (double a : it->second) {
      ++out.annotations;
      if (a >= *gmin && a <= *gmax) out.accuracy += 1.0;
    }
    mean_ann.push_back(std::accumulate(it->second.begin(), it->second.end(), 0.0) /
                       static_cast<double>(it->second.size()));
    mean_gold.push_back(std::accumulate(gold_ratings.begin(), gold_ratings.end(), 0.0) /
                        static_cast<double>(gold_ratings.size()));
  }
  if (out.annotations == 0) fail(kModule, "no overlapping items between annotations and gold");
  out.accuracy /= static_cast<double>(out.annotations);
  if (mean_ann.size() >= 2) out.correlation = spearman_rho(mean_ann, mean_gold);
  return out;
}

AgreementReport agreement_metrics(const RatingsTable& table, const RatingsTable* gold) {
  AgreementReport rep;

  for (const auto& dim : table.dimension_ids()) {
    // Items are (prompt, model) cells; ratings are raw human levels.
    std::map<CellKey, std::vector<double>> items;
    for (const auto& r : table.rows)
      if (r.rater_kind == RaterKind::human && r.dimension_id == dim && r.raw_level)
        items[{r.prompt_id, r.dimension_id, r.model_id}].push_back(
            static_cast<double>(*r.raw_level));
    if (items.empty()) continue;

    DimensionAgreement d;
    std::vector<std::vector<double>> lists;
    for (const auto& [cell, v] : items) lists.push_back(v);
    d.items = static_cast<long>(lists.size());
    try {
      d.alpha_interval = krippendorff_alpha(lists, AlphaMetric::interval);
      d.alpha_ordinal = krippendorff_alpha(lists, AlphaMetric::ordinal);
    } catch (const Error&) {
      // Too few pairable items: leave alpha unset.
    }
    d.observed = observed_agreement(lists);

    if (gold) {
      std::map<CellKey, std::vector<double>> gold_items;
      for (const auto& r : gold->rows)
        if (r.rater_kind == RaterKind::human && r.dimension_id == dim && r.raw_level)
          gold_items[{r.prompt_id, r.dimension_id, r.model_id}].push_back(
              static_cast<double>(*r.raw_level));
      if (!gold_items.empty()) d.gold = gold_accuracy(items, gold_items);
    }
    rep.per_dimension[dim] = std::move(d);
  }
  if (rep.per_dimension.empty()) fail(kModule, "no human ratings to assess");

  // Averages over dimensions with a defined value.
  const auto avg = [](std::vector<double> v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<double> ai, ao, ob, ga, gc;
  for (const auto& [dim, d] : rep.per_dimension) {
    if (d.alpha_interval) ai.push_back(*d.alpha_interval);
    if (d.alpha_ordinal) ao.push_back(*d.alpha_ordinal);
    if (d.observed) ob.push_back(*d.observed);
    if (d.gold) {
      ga.push_back(d.gold->accuracy);
      if (d.gold->correlation) gc.push_back(*d.gold->correlation);
    }
    rep.average.items += d.items;
  }
  rep.average.alpha_interval = avg(ai);
  rep.average.alpha_ordinal = avg(ao);
  rep.average.observed = avg(ob);
  if (!ga.empty()) {
    GoldMetrics g;
    g.accuracy = *avg(ga);
    g.correlation = avg(gc);
    rep.average.gold = g;
  }
  return rep;
}

CorrelationReport judge_reference_correlation(const RatingsTable& table) {
  CorrelationReport rep;
  for (const auto& j : table.config.judges) {
    for (const auto& dim : table.dimension_ids()) {
      std::vector<double> js, rs;
      for (const auto& r : table.rows) {
        if (r.rater_kind != RaterKind::llm_judge || r.rater_id != j ||
            r.dimension_id != dim || r.is_na())
          continue;
        const auto it = table.reference.find({r.prompt_id, r.dimension_id, r.model_id});
        if (it == table.reference.end()) continue;
        js.push_back(*r.value);
        rs.push_back(it->second);
      }
      if (js.size() >= 2) rep.rho[j][dim] = spearman_rho(js, rs);
    }
  }
  return rep;
}

HeatmapTable heatmap_means(const RatingsTable& table) {
  HeatmapTable h;
  h.row_ids = table.config.judges;
  h.row_ids.push_back("human");
  h.model_ids = table.config.models;

  const auto R = static_cast<Eigen::Index>(h.row_ids.size());
  const auto C = static_cast<Eigen::Index>(h.model_ids.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(R, C);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(R, C);

  std::map<std::string, Eigen::Index> row_of, col_of;
  for (Eigen::Index i = 0; i < R; ++i) row_of[h.row_ids[static_cast<std::size_t>(i)]] = i;
  for (Eigen::Index c = 0; c < C; ++c) col_of[h.model_ids[static_cast<std::size_t>(c)]] = c;

  for (const auto& r : table.rows) {
    if (r.is_na()) continue;
    const auto cit = col_of.find(r.model_id);
    if (cit == col_of.end()) continue;
    Eigen::Index row;
    if (r.rater_kind == RaterKind::human) {
      row = R - 1;
    } else {
      const auto rit = row_of.find(r.rater_id);
      if (rit == row_of.end()) continue;
      row = rit->second;
    }
    sum(row, cit->second) += *r.value;
    count(row, cit->second) += 1;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  h.means = Eigen::MatrixXd::Constant(R, C, nan);
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index c = 0; c < C; ++c)
      if (count(i, c) > 0) h.means(i, c) = sum(i, c) / count(i, c);

  h.row_normalized = Eigen::MatrixXd::Constant(R, C, nan);
  for (Eigen::Index i = 0; i < R; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index c = 0; c < C; ++c)
      if (std::isfinite(h.means(i, c))) {
        lo = std::min(lo, h.means(i, c));
        hi = std::max(hi, h.means(i, c));
      }
    if (!(hi > lo)) {
      h.constant_rows.push_back(static_cast<int>(i));
      continue;
    }
    for (Eigen::Index c = 0; c < C; ++c)
      if (std::isfinite(h.means(i, c))) h.row_normalized(i, c) = (h.means(i, c) - lo) / (hi - lo);
  }

  for (Eigen::Index i = 0; i + 1 < R; ++i) {
    const auto cit = col_of.find(h.row_ids[static_cast<std::size_t>(i)]);
    if (cit != col_of.end()) h.diagonal.emplace_back(static_cast<int>(i), static_cast<int>(cit->second));
  }
  return h;
}

RatingsTable debias_scores(const RatingsTable& table, const BiasReport& report,
                           std::vector<RowKey>* out_of_range) {
  RatingsTable out = table;
  for (auto& r : out.rows) {
    if (r.rater_kind != RaterKind::llm_judge || r.is_na()) continue;
    double adj = 0;
    if (r.rater_id == r.model_id) {
      const auto it = report.self_bias.find(r.rater_id);
      if (it != report.self_bias.end()) adj += it->second.estimate;
    } else if (table.config.family_of.count(r.rater_id) &&
               table.config.family_of.count(r.model_id) &&
               table.config.family(r.rater_id) == table.config.family(r.model_id)) {
      const auto it = report.family_bias.find(table.config.family(r.rater_id));
      if (it != report.family_bias.end()) adj += it->second.estimate;
    }
    if (adj == 0) continue;
    const double v = *r.value - adj;
    r.value = v;
    r.raw_level.reset();  // adjusted scores no longer correspond to a level
    if ((v < 0.0 || v > 1.0) && out_of_range)
      out_of_range->push_back({r.prompt_id, r.dimension_id, r.model_id, r.rater_id});
  }
  return out;
}

}  // namespace judgebias
