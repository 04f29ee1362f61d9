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

#include "core/report.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/numeric.hpp"

namespace judgebias {

namespace {

nlohmann::json opt_to_json(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

nlohmann::json wald_to_json(const WaldInterval& w) {
  return {
      {"estimate", w.estimate}, {"std_error", w.std_error}, {"level", w.level},
      {"lower", w.lower},       {"upper", w.upper},         {"p_value", w.p_value},
      {"reject_zero", w.reject_zero},
  };
}

nlohmann::json bias_report_to_json(const BiasReport& r) {
  nlohmann::json self = nlohmann::json::object();
  for (const auto& [judge, w] : r.self_bias) self[judge] = wald_to_json(w);
  nlohmann::json family = nlohmann::json::object();
  for (const auto& [fam, w] : r.family_bias) family[fam] = wald_to_json(w);
  nlohmann::json extra = nlohmann::json::object();
  for (const auto& [name, w] : r.extra_terms) extra[name] = wald_to_json(w);

  nlohmann::json j = {
      {"slice", r.slice_label},
      {"self_bias", self},
      {"family_bias", family},
      {"not_estimable", r.not_estimable},
      {"fit", {{"n", r.n},
               {"p", r.p},
               {"cov_type", r.cov_type},
               {"condition_number", r.condition_number},
               {"dropped_columns", r.dropped_columns},
               {"excluded_rows", r.excluded_rows},
               {"converged", r.converged}}},
  };
  if (!extra.empty()) j["extra_terms"] = extra;
  return j;
}

nlohmann::json agreement_report_to_json(const AgreementReport& r) {
  const auto dim_json = [](const DimensionAgreement& d) {
    nlohmann::json j = {
        {"krippendorff_alpha", opt_to_json(d.alpha_interval)},
        {"krippendorff_alpha_ordinal", opt_to_json(d.alpha_ordinal)},
        {"observed_agreement", opt_to_json(d.observed)},
        {"items", d.items},
    };
    if (d.gold) {
      j["gold_accuracy"] = d.gold->accuracy;
      j["gold_correlation"] = opt_to_json(d.gold->correlation);
      j["gold_items"] = d.gold->items;
    }
    return j;
  };
  nlohmann::json per_dim = nlohmann::json::object();
  for (const auto& [dim, d] : r.per_dimension) per_dim[dim] = dim_json(d);
  return {{"per_dimension", per_dim}, {"average", dim_json(r.average)}};
}

nlohmann::json correlation_report_to_json(const CorrelationReport& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [judge, dims] : r.rho) {
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [dim, rho] : dims) d[dim] = opt_to_json(rho);
    j[judge] = d;
  }
  return {{"spearman_rho", j}};
}

nlohmann::json heatmap_to_json(const HeatmapTable& h) {
  const auto matrix_json = [&](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        row.push_back(std::isfinite(m(i, c)) ? nlohmann::json(m(i, c)) : nlohmann::json(nullptr));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& [r, c] : h.diagonal) diag.push_back({{"row", r}, {"col", c}});
  return {
      {"rows", h.row_ids},
      {"models", h.model_ids},
      {"means", matrix_json(h.means)},
      {"row_normalized", matrix_json(h.row_normalized)},
      {"diagonal", diag},
      {"constant_rows", h.constant_rows},
  };
}

std::string bias_plotdata_csv(const std::vector<BiasReport>& reports) {
  std::ostringstream out;
  out << "slice,judge_or_family,kind,estimate,se,lower,upper,reject_zero,n\n";
  const auto emit = [&](const std::string& slice, const std::string& id, const char* kind,
                        const WaldInterval& w, long n) {
    out << csv_quote(slice, ',') << ',' << csv_quote(id, ',') << ',' << kind << ','
        << format_double(w.estimate) << ',' << format_double(w.std_error) << ','
        << format_double(w.lower) << ',' << format_double(w.upper) << ','
        << (w.reject_zero ? "true" : "false") << ',' << n << "\n";
  };
  for (const auto& r : reports) {
    for (const auto& [judge, w] : r.self_bias) emit(r.slice_label, judge, "self_bias", w, r.n);
    for (const auto& [fam, w] : r.family_bias) emit(r.slice_label, fam, "family_bias", w, r.n);
    for (const auto& [name, w] : r.extra_terms) emit(r.slice_label, name, "extra", w, r.n);
  }
  return out.str();
}

std::string heatmap_csv(const HeatmapTable& h, bool row_normalized) {
  const Eigen::MatrixXd& m = row_normalized ? h.row_normalized : h.means;
  std::ostringstream out;
  out << "rater";
  for (const auto& id : h.model_ids) out << ',' << csv_quote(id, ',');
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << csv_quote(h.row_ids[static_cast<std::size_t>(i)], ',');
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << ',';
      if (std::isfinite(m(i, c))) out << format_double(m(i, c));
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json Report::to_json() const {
  switch (kind) {
    case Kind::bias: {
      nlohmann::json reports = nlohmann::json::array();
      for (const auto& r : bias) reports.push_back(bias_report_to_json(r));
      return {{"kind", "bias"}, {"reports", reports}};
    }
    case Kind::agreement:
      if (!agreement) fail("report", "agreement payload missing");
      return {{"kind", "agreement"}, {"agreement", agreement_report_to_json(*agreement)}};
    case Kind::correlation:
      if (!correlation) fail("report", "correlation payload missing");
      return {{"kind", "correlation"},
              {"correlation", correlation_report_to_json(*correlation)}};
    case Kind::heatmap:
      if (!heatmap) fail("report", "heatmap payload missing");
      return {{"kind", "heatmap"}, {"heatmap", heatmap_to_json(*heatmap)}};
  }
  fail("report", "unknown report kind");
}

std::string Report::to_csv() const {
  switch (kind) {
    case Kind::bias:
      return bias_plotdata_csv(bias);
    case Kind::agreement: {
      if (!agreement) fail("report", "agreement payload missing");
      std::ostringstream out;
      out << "dimension,krippendorff_alpha,krippendorff_alpha_ordinal,observed_agreement,"
             "gold_accuracy,gold_correlation,items\n";
      const auto emit = [&](const std::string& dim, const DimensionAgreement& d) {
        const auto cell = [](const std::optional<double>& v) {
          return v && std::isfinite(*v) ? format_double(*v) : std::string();
        };
        out << csv_quote(dim, ',') << ',' << cell(d.alpha_interval) << ','
            << cell(d.alpha_ordinal) << ',' << cell(d.observed) << ',';
        if (d.gold) out << format_double(d.gold->accuracy);
        out << ',';
        if (d.gold) out << cell(d.gold->correlation);
        out << ',' << d.items << "\n";
      };
      for (const auto& [dim, d] : agreement->per_dimension) emit(dim, d);
      emit("average", agreement->average);
      return out.str();
    }
    case Kind::correlation: {
      if (!correlation) fail("report", "correlation payload missing");
      std::ostringstream out;
      out << "judge,dimension,spearman_rho\n";
      for (const auto& [judge, dims] : correlation->rho)
        for (const auto& [dim, rho] : dims) {
          out << csv_quote(judge, ',') << ',' << csv_quote(dim, ',') << ',';
          if (rho && std::isfinite(*rho)) out << format_double(*rho);
          out << "\n";
        }
      return out.str();
    }
    case Kind::heatmap:
      if (!heatmap) fail("report", "heatmap payload missing");
      return heatmap_csv(*heatmap, /*row_normalized=*/false);
  }
  fail("report", "unknown report kind");
}

void write_report_json(const Report& report, const std::string& path) {
  atomic_write_file(path, report.to_json().dump(2) + "\n");
}

void write_report_csv(const Report& report, const std::string& path) {
  atomic_write_file(path, report.to_csv());
}

}  // namespace judgebias
