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

#include "judgebias/judgebias.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "core/analyses.hpp"
#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/judge_parser.hpp"
#include "core/report.hpp"
#include "core/synth.hpp"

using judgebias::Error;

struct jb_config {
  judgebias::DatasetConfig cfg;
};

struct jb_table {
  judgebias::RatingsTable table;
};

struct jb_report {
  judgebias::Report report;
};

namespace {

thread_local std::string g_last_error;

jb_status set_error(const std::string& message, jb_status code) {
  g_last_error = message;
  return code;
}

jb_status status_of(const Error& e) {
  const auto& m = e.module();
  if (m == "io") return JB_ERR_IO;
  if (m == "dataset" || m == "judge_parser" || m == "synth") return JB_ERR_PARSE;
  if (m == "estimators" || m == "design" || m == "analyses" || m == "numeric")
    return JB_ERR_NUMERIC;
  return JB_ERR_INTERNAL;
}

/// Run `fn`, translating exceptions into status codes.
template <typename Fn>
jb_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return set_error(e.what(), status_of(e));
  } catch (const nlohmann::json::exception& e) {
    return set_error(std::string("json: ") + e.what(), JB_ERR_PARSE);
  } catch (const std::exception& e) {
    return set_error(e.what(), JB_ERR_INTERNAL);
  } catch (...) {
    return set_error("unknown error", JB_ERR_INTERNAL);
  }
}

jb_status require(bool ok, const char* what) {
  return ok ? JB_OK : set_error(std::string("invalid argument: ") + what, JB_ERR_INVALID);
}

judgebias::EstimateOptions parse_options(const char* opts_json) {
  judgebias::EstimateOptions o;
  if (!opts_json || !*opts_json) return o;
  const auto j = nlohmann::json::parse(opts_json);
  if (j.contains("cov_type"))
    o.cov_type = judgebias::cov_type_from_string(j.at("cov_type").get<std::string>());
  o.level = j.value("level", o.level);
  o.include_family = j.value("include_family", o.include_family);
  o.dimension_fe = j.value("dimension_fe", o.dimension_fe);
  o.length_control = j.value("length_control", o.length_control);
  o.length_per_judge = j.value("length_per_judge", o.length_per_judge);
  if (j.contains("coding")) {
    const auto c = j.at("coding").get<std::string>();
    if (c == "reference")
      o.coding = judgebias::Coding::reference;
    else if (c == "sum_to_zero")
      o.coding = judgebias::Coding::sum_to_zero;
    else
      judgebias::fail("analyses", "unknown coding '" + c + "'");
  }
  return o;
}

}  // namespace

extern "C" {

const char* jb_version(void) { return "0.1.0"; }

const char* jb_last_error(void) { return g_last_error.c_str(); }

jb_status jb_config_load(const char* path, jb_config** out) {
  if (auto s = require(path && out, "path/out"); s != JB_OK) return s;
  return guarded([&] {
    *out = new jb_config{judgebias::load_config(path)};
    return JB_OK;
  });
}

jb_status jb_config_parse(const char* json_text, jb_config** out) {
  if (auto s = require(json_text && out, "json_text/out"); s != JB_OK) return s;
  return guarded([&] {
    *out = new jb_config{judgebias::parse_config_json(json_text)};
    return JB_OK;
  });
}

void jb_config_free(jb_config* config) { delete config; }

jb_status jb_table_load(const char* path, const jb_config* config, jb_table** out) {
  if (auto s = require(path && config && out, "path/config/out"); s != JB_OK) return s;
  return guarded([&] {
    *out = new jb_table{judgebias::load_ratings(path, config->cfg.scales, config->cfg.config)};
    return JB_OK;
  });
}

jb_status jb_table_aggregate_reference(const jb_table* table, jb_table** out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  return guarded([&] {
    *out = new jb_table{judgebias::aggregate_reference(table->table)};
    return JB_OK;
  });
}

jb_status jb_table_filter(const jb_table* table, const char* filter_json, jb_table** out) {
  if (auto s = require(table && filter_json && out, "table/filter_json/out"); s != JB_OK) return s;
  return guarded([&] {
    const auto j = nlohmann::json::parse(filter_json);
    judgebias::FilterSpec spec;
    if (j.contains("dimensions"))
      spec.dimensions = j.at("dimensions").get<std::set<std::string>>();
    if (j.contains("task_types"))
      spec.task_types = j.at("task_types").get<std::set<std::string>>();
    if (j.contains("drop_models"))
      spec.drop_models = j.at("drop_models").get<std::set<std::string>>();
    if (j.contains("drop_judges"))
      spec.drop_judges = j.at("drop_judges").get<std::set<std::string>>();
    *out = new jb_table{judgebias::filter_table(table->table, spec)};
    return JB_OK;
  });
}

jb_status jb_table_lofo_reference(const jb_table* table, const char* family, jb_table** out) {
  if (auto s = require(table && family && out, "table/family/out"); s != JB_OK) return s;
  return guarded([&] {
    *out = new jb_table{judgebias::lofo_reference(table->table, family)};
    return JB_OK;
  });
}

jb_status jb_table_discretize(const jb_table* table, int num_levels, const double* thresholds,
                              jb_table** out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::ScaleDef scale;
    scale.num_levels = num_levels;
    if (thresholds) {
      std::vector<double> t(thresholds, thresholds + (num_levels - 1));
      *out = new jb_table{judgebias::discretize(table->table, scale, &t)};
    } else {
      *out = new jb_table{judgebias::discretize(table->table, scale, nullptr)};
    }
    return JB_OK;
  });
}

jb_status jb_table_write_csv(const jb_table* table, const char* path) {
  if (auto s = require(table && path, "table/path"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::write_ratings_csv_file(table->table, path);
    return JB_OK;
  });
}

jb_status jb_table_write_config(const jb_table* table, const char* path) {
  if (auto s = require(table && path, "table/path"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::atomic_write_file(
        path, judgebias::config_to_json(table->table.config, table->table.scales));
    return JB_OK;
  });
}

jb_status jb_table_num_rows(const jb_table* table, size_t* out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  *out = table->table.rows.size();
  return JB_OK;
}

void jb_table_free(jb_table* table) { delete table; }

jb_status jb_simulate(const char* sim_config_json, jb_table** out) {
  if (auto s = require(sim_config_json && out, "sim_config_json/out"); s != JB_OK) return s;
  return guarded([&] {
    const auto cfg = judgebias::parse_sim_config_json(sim_config_json);
    *out = new jb_table{judgebias::simulate(cfg)};
    return JB_OK;
  });
}

jb_status jb_simulate_quality_shift(long num_prompts, uint64_t seed, int panel, double noise_sd,
                                    jb_table** out) {
  if (auto s = require(out != nullptr, "out"); s != JB_OK) return s;
  return guarded([&] {
    *out = new jb_table{
        judgebias::simulate_quality_shift_panel(num_prompts, seed, panel, noise_sd)};
    return JB_OK;
  });
}

jb_status jb_fit(const jb_table* table, const char* opts_json, jb_report** out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::Report rep;
    rep.kind = judgebias::Report::Kind::bias;
    rep.bias.push_back(judgebias::estimate_bias(table->table, parse_options(opts_json)));
    *out = new jb_report{std::move(rep)};
    return JB_OK;
  });
}

jb_status jb_slice(const jb_table* table, const char* by, const char* opts_json,
                   jb_report** out) {
  if (auto s = require(table && by && out, "table/by/out"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::SliceBy sb;
    const std::string b = by;
    if (b == "dimension")
      sb = judgebias::SliceBy::dimension;
    else if (b == "task")
      sb = judgebias::SliceBy::task;
    else
      judgebias::fail("analyses", "unknown slice '" + b + "' (use dimension|task)");
    judgebias::Report rep;
    rep.kind = judgebias::Report::Kind::bias;
    rep.bias = judgebias::slice_bias(table->table, sb, parse_options(opts_json));
    *out = new jb_report{std::move(rep)};
    return JB_OK;
  });
}

jb_status jb_robust(const jb_table* table, const char* check, const char* opts_json,
                    jb_report** out) {
  if (auto s = require(table && check && out, "table/check/out"); s != JB_OK) return s;
  return guarded([&] {
    const std::string c = check;
    const auto opts = parse_options(opts_json);
    nlohmann::json extra = nlohmann::json::object();
    if (opts_json && *opts_json) extra = nlohmann::json::parse(opts_json);

    judgebias::Report rep;
    rep.kind = judgebias::Report::Kind::bias;
    if (c == "length") {
      rep.bias.push_back(judgebias::robustness_length(table->table, opts));
    } else if (c == "ordinal") {
      rep.bias = judgebias::robustness_ordinal(table->table, opts.level);
    } else if (c == "gam") {
      const int knots = extra.value("interior_knots", 4);
      rep.bias.push_back(judgebias::robustness_gam(table->table, knots, opts));
    } else if (c == "lofo") {
      std::vector<std::string> families;
      if (extra.contains("family")) {
        families.push_back(extra.at("family").get<std::string>());
      } else {
        std::set<std::string> fams;
        for (const auto& j : table->table.config.judges)
          fams.insert(table->table.config.family(j));
        families.assign(fams.begin(), fams.end());
      }
      for (const auto& fam : families) {
        const auto lofo = judgebias::lofo_reference(table->table, fam);
        auto r = judgebias::estimate_bias(lofo, opts);
        r.slice_label = "reference:family-" + fam + "-judges";
        rep.bias.push_back(std::move(r));
      }
    } else if (c == "drop-models") {
      if (!extra.contains("drop"))
        judgebias::fail("analyses", "drop-models check needs a \"drop\" list");
      judgebias::FilterSpec spec;
      spec.drop_models = extra.at("drop").get<std::set<std::string>>();
      const auto filtered = judgebias::filter_table(table->table, spec);
      auto r = judgebias::estimate_bias(filtered, opts);
      std::string label = "robustness:drop-models:";
      bool first = true;
      for (const auto& m : spec.drop_models) {
        if (!first) label += "+";
        label += m;
        first = false;
      }
      r.slice_label = label;
      rep.bias.push_back(std::move(r));
    } else {
      judgebias::fail("analyses",
                      "unknown check '" + c + "' (use length|ordinal|gam|lofo|drop-models)");
    }
    *out = new jb_report{std::move(rep)};
    return JB_OK;
  });
}

jb_status jb_agreement(const jb_table* table, const jb_table* gold, jb_report** out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::Report rep;
    rep.kind = judgebias::Report::Kind::agreement;
    rep.agreement =
        judgebias::agreement_metrics(table->table, gold ? &gold->table : nullptr);
    *out = new jb_report{std::move(rep)};
    return JB_OK;
  });
}

jb_status jb_correlate(const jb_table* table, jb_report** out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::Report rep;
    rep.kind = judgebias::Report::Kind::correlation;
    rep.correlation = judgebias::judge_reference_correlation(table->table);
    *out = new jb_report{std::move(rep)};
    return JB_OK;
  });
}

jb_status jb_heatmap(const jb_table* table, jb_report** out) {
  if (auto s = require(table && out, "table/out"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::Report rep;
    rep.kind = judgebias::Report::Kind::heatmap;
    rep.heatmap = judgebias::heatmap_means(table->table);
    *out = new jb_report{std::move(rep)};
    return JB_OK;
  });
}

jb_status jb_debias(const jb_table* table, const jb_report* fit, jb_table** out) {
  if (auto s = require(table && fit && out, "table/fit/out"); s != JB_OK) return s;
  return guarded([&] {
    if (fit->report.kind != judgebias::Report::Kind::bias || fit->report.bias.empty())
      judgebias::fail("analyses", "debias needs a bias report");
    *out = new jb_table{judgebias::debias_scores(table->table, fit->report.bias.front())};
    return JB_OK;
  });
}

jb_status jb_parse_judgments(const char* path, const char* labelmap_path,
                             const jb_config* config, int strict, size_t* dropped,
                             jb_table** out) {
  if (auto s = require(path && labelmap_path && config && out, "path/labelmap/config/out");
      s != JB_OK)
    return s;
  return guarded([&] {
    const auto maps = judgebias::load_label_maps(labelmap_path);
    const auto records = judgebias::load_judgment_records(path);
    std::vector<judgebias::ParsedJudgment> parsed;
    size_t failures = 0;
    for (const auto& rec : records) {
      try {
        parsed.push_back(
            {rec, judgebias::parse_judge_response(rec.response_text, rec.dimension_id, maps,
                                                  strict != 0)});
      } catch (const Error&) {
        ++failures;  // malformed judgments are dropped with a count
      }
    }
    auto rows = judgebias::labels_to_rows(parsed, config->cfg.scales);
    *out = new jb_table{
        judgebias::make_table(std::move(rows), config->cfg.scales, config->cfg.config)};
    if (dropped) *dropped = failures;
    return JB_OK;
  });
}

jb_status jb_report_to_json(const jb_report* report, char** out_json) {
  if (auto s = require(report && out_json, "report/out_json"); s != JB_OK) return s;
  return guarded([&] {
    const std::string text = report->report.to_json().dump(2) + "\n";
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_json = buf;
    return JB_OK;
  });
}

jb_status jb_report_write_json(const jb_report* report, const char* path) {
  if (auto s = require(report && path, "report/path"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::write_report_json(report->report, path);
    return JB_OK;
  });
}

jb_status jb_report_write_csv(const jb_report* report, const char* path) {
  if (auto s = require(report && path, "report/path"); s != JB_OK) return s;
  return guarded([&] {
    judgebias::write_report_csv(report->report, path);
    return JB_OK;
  });
}

jb_status jb_report_write_heatmap_row_normalized(const jb_report* report, const char* path) {
  if (auto s = require(report && path, "report/path"); s != JB_OK) return s;
  return guarded([&] {
    if (report->report.kind != judgebias::Report::Kind::heatmap || !report->report.heatmap)
      judgebias::fail("analyses", "not a heatmap report");
    judgebias::atomic_write_file(
        path, judgebias::heatmap_csv(*report->report.heatmap, /*row_normalized=*/true));
    return JB_OK;
  });
}

void jb_report_free(jb_report* report) { delete report; }

void jb_string_free(char* s) { delete[] s; }

}  // extern "C"
