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

// Command-line front end. Everything analytic goes through the C API of the
// judgebias shared library; this file only handles arguments, file plumbing
// and the run manifest.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "judgebias/judgebias.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;  // data / numeric error
constexpr int kExitUsage = 2;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(jb_status s) {
  if (s != JB_OK) throw CliError(jb_last_error());
}

using ConfigPtr = std::unique_ptr<jb_config, decltype(&jb_config_free)>;
using TablePtr = std::unique_ptr<jb_table, decltype(&jb_table_free)>;
using ReportPtr = std::unique_ptr<jb_report, decltype(&jb_report_free)>;

ConfigPtr load_config(const std::string& path) {
  jb_config* c = nullptr;
  check(jb_config_load(path.c_str(), &c));
  return {c, &jb_config_free};
}

TablePtr load_table(const std::string& path, const jb_config* cfg, bool aggregate) {
  jb_table* t = nullptr;
  check(jb_table_load(path.c_str(), cfg, &t));
  TablePtr table{t, &jb_table_free};
  if (aggregate) {
    jb_table* agg = nullptr;
    check(jb_table_aggregate_reference(table.get(), &agg));
    table.reset(agg);
  }
  return table;
}

json report_json(const jb_report* rep) {
  char* text = nullptr;
  check(jb_report_to_json(rep, &text));
  std::unique_ptr<char[], decltype(&jb_string_free)> owned{text, &jb_string_free};
  return json::parse(owned.get());
}

std::string swap_extension(const std::string& path, const std::string& ext) {
  std::filesystem::path p(path);
  p.replace_extension(ext);
  return p.string();
}

/// Collected while a subcommand runs; written as <out>.manifest.json.
struct Manifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> input_paths;
  std::map<std::string, std::string> options;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> output_paths;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const std::string& path) const {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    json j = {
        {"command", command},
        {"config_path", config_path},
        {"input_paths", input_paths},
        {"options", options},
        {"tool_version", jb_version()},
        {"output_paths", output_paths},
        {"wall_time_ms", elapsed},
    };
    if (seed) j["seed"] = *seed;
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw CliError("io: cannot write manifest " + path);
      out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
  }
};

/// Write the report as JSON (primary out) and tidy CSV alongside.
void emit_report(const jb_report* rep, const std::string& out_path, Manifest& manifest,
                 bool heatmap = false) {
  check(jb_report_write_json(rep, out_path.c_str()));
  manifest.output_paths.push_back(out_path);
  const std::string csv = swap_extension(out_path, ".csv");
  check(jb_report_write_csv(rep, csv.c_str()));
  manifest.output_paths.push_back(csv);
  if (heatmap) {
    const std::string rn = swap_extension(out_path, "") + "_row_normalized.csv";
    check(jb_report_write_heatmap_row_normalized(rep, rn.c_str()));
    manifest.output_paths.push_back(rn);
  }
}

struct FitFlags {
  std::string cov_type = "HC1";
  double level = 0.90;
  bool no_family = false;
  bool no_dimension_fe = false;
  std::string coding = "reference";
  bool length_control = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--cov", cov_type, "Covariance type: HC0|HC1|cluster")
        ->check(CLI::IsMember({"HC0", "HC1", "hc0", "hc1", "cluster"}));
    cmd->add_option("--level", level, "Confidence level (default 0.9)");
    cmd->add_flag("--no-family", no_family, "Drop the family-bias terms");
    cmd->add_flag("--no-dimension-fe", no_dimension_fe, "Drop dimension fixed effects");
    cmd->add_option("--coding", coding, "Fixed-effect coding")
        ->check(CLI::IsMember({"reference", "sum_to_zero"}));
    cmd->add_flag("--length-control", length_control, "Add per-judge length terms");
  }

  std::string to_json(Manifest* manifest) const {
    json j = {
        {"cov_type", cov_type}, {"level", level},
        {"include_family", !no_family}, {"dimension_fe", !no_dimension_fe},
        {"coding", coding}, {"length_control", length_control},
    };
    if (manifest)
      for (const auto& [k, v] : j.items()) manifest->options[k] = v.dump();
    return j.dump();
  }
};

std::string env_config_default() {
  const char* env = std::getenv("JUDGEBIAS_CONFIG");
  return env ? env : "";
}

// ---- replicate ----------------------------------------------------------

struct CheckResult {
  std::string name;
  std::string status;  // pass | fail | skipped
  std::string detail;
};

void print_checks(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    std::string tag = c.status == "pass" ? "PASS" : c.status == "fail" ? "FAIL" : "SKIP";
    std::fprintf(stderr, "[%s] %s%s%s\n", tag.c_str(), c.name.c_str(),
                 c.detail.empty() ? "" : ": ", c.detail.c_str());
  }
}

std::optional<std::string> find_id(const std::vector<std::string>& ids,
                                   const std::vector<std::string>& needles) {
  for (const auto& id : ids) {
    std::string low = id;
    for (auto& ch : low) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    bool all = true;
    for (const auto& n : needles)
      if (low.find(n) == std::string::npos) all = false;
    if (all) return id;
  }
  return std::nullopt;
}

int run_replicate(const std::string& out_dir, const std::string& data_path,
                  const std::string& config_path, const std::string& gold_path, long n,
                  std::uint64_t seed, Manifest& manifest) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<CheckResult> checks;
  bool any_fail = false;

  const auto out = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  if (data_path.empty()) {
    // Synthetic mode: quality-shift suite, linear recovery and gap algebra.
    const char* panel_names[3] = {"lower", "equal", "higher"};
    std::vector<double> gammas, lowers, uppers, gaps, deltas;
    for (int panel = 0; panel < 3; ++panel) {
      jb_table* t = nullptr;
      check(jb_simulate_quality_shift(n, seed, panel, 0.1, &t));
      TablePtr table{t, &jb_table_free};

      const std::string csv = out(std::string("sim_") + panel_names[panel] + ".csv");
      check(jb_table_write_csv(table.get(), csv.c_str()));
      manifest.output_paths.push_back(csv);

      jb_report* r = nullptr;
      check(jb_fit(table.get(), nullptr, &r));
      ReportPtr fit{r, &jb_report_free};
      emit_report(fit.get(), out(std::string("fit_") + panel_names[panel] + ".json"), manifest);

      const json jf = report_json(fit.get());
      const auto& gj = jf.at("reports").at(0).at("self_bias").at("judge-model");
      gammas.push_back(gj.at("estimate").get<double>());
      lowers.push_back(gj.at("lower").get<double>());
      uppers.push_back(gj.at("upper").get<double>());

      jb_report* h = nullptr;
      check(jb_heatmap(table.get(), &h));
      ReportPtr heat{h, &jb_report_free};
      const json jh = report_json(heat.get());
      const auto& rows = jh.at("heatmap").at("rows");
      const auto& models = jh.at("heatmap").at("models");
      int jrow = -1, own = -1, peer = -1;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i] == "judge-model") jrow = static_cast<int>(i);
      for (std::size_t c = 0; c < models.size(); ++c) {
        if (models[c] == "judge-model") own = static_cast<int>(c);
        if (models[c] == "peer-model") peer = static_cast<int>(c);
      }
      const auto& means = jh.at("heatmap").at("means");
      gaps.push_back(means[jrow][own].get<double>() - means[jrow][peer].get<double>());
      deltas.push_back((panel - 1) * 0.25);
    }
    for (int i = 0; i < 3; ++i) {
      const bool ok = gammas[i] > 0.23 && gammas[i] < 0.27 && lowers[i] > 0;
      checks.push_back({std::string("synthetic gamma recovery (") + panel_names[i] + ")",
                        ok ? "pass" : "fail",
                        "gamma_hat=" + std::to_string(gammas[i])});
      any_fail |= !ok;
      const double expected_gap = 0.25 + 0.8 * deltas[i];
      const bool gap_ok = std::abs(gaps[i] - expected_gap) < 0.03;
      checks.push_back({std::string("naive score gap (") + panel_names[i] + ")",
                        gap_ok ? "pass" : "fail",
                        "gap=" + std::to_string(gaps[i]) +
                            " expected~" + std::to_string(expected_gap)});
      any_fail |= !gap_ok;
    }
    bool overlap = true;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (lowers[a] > uppers[b]) overlap = false;
    checks.push_back({"gamma stable across quality shifts", overlap ? "pass" : "fail", ""});
    any_fail |= !overlap;

    checks.push_back({"dataset replication (Table 3 / sign patterns)", "skipped",
                      "no dataset supplied; pass --data/--config"});
  } else {
    if (config_path.empty()) throw CLI::ValidationError("--config is required with --data");
    auto cfg = load_config(config_path);
    auto table = load_table(data_path, cfg.get(), /*aggregate=*/true);
    manifest.input_paths.push_back(data_path);

    jb_report* r = nullptr;
    check(jb_fit(table.get(), nullptr, &r));
    ReportPtr fit{r, &jb_report_free};
    emit_report(fit.get(), out("fit.json"), manifest);

    for (const char* by : {"dimension", "task"}) {
      jb_report* s = nullptr;
      if (jb_slice(table.get(), by, nullptr, &s) == JB_OK) {
        ReportPtr rep{s, &jb_report_free};
        emit_report(rep.get(), out(std::string("slice_") + by + ".json"), manifest);
      } else {
        checks.push_back({std::string("slice by ") + by, "skipped", jb_last_error()});
      }
    }
    for (const char* chk : {"length", "ordinal", "gam", "lofo"}) {
      jb_report* s = nullptr;
      if (jb_robust(table.get(), chk, nullptr, &s) == JB_OK) {
        ReportPtr rep{s, &jb_report_free};
        emit_report(rep.get(), out(std::string("robust_") + chk + ".json"), manifest);
      } else {
        checks.push_back({std::string("robustness ") + chk, "skipped", jb_last_error()});
      }
    }

    const json jf = report_json(fit.get());
    const auto& models_j = jf.at("reports").at(0).at("self_bias");
    std::vector<std::string> judge_ids;
    for (const auto& [k, v] : models_j.items()) judge_ids.push_back(k);

    // Weakest-model removal, when those models are present.
    {
      std::vector<std::string> drop;
      if (auto m = find_id(judge_ids, {"mistral", "7b"})) drop.push_back(*m);
      if (auto m = find_id(judge_ids, {"llama", "8b"})) drop.push_back(*m);
      if (drop.size() == 2) {
        json opts = {{"drop", drop}};
        jb_report* s = nullptr;
        if (jb_robust(table.get(), "drop-models", opts.dump().c_str(), &s) == JB_OK) {
          ReportPtr rep{s, &jb_report_free};
          emit_report(rep.get(), out("robust_drop_models.json"), manifest);
        }
        if (auto m = find_id(judge_ids, {"claude", "v2"})) {
          drop.push_back(*m);
          json opts3 = {{"drop", drop}};
          jb_report* s3 = nullptr;
          if (jb_robust(table.get(), "drop-models", opts3.dump().c_str(), &s3) == JB_OK) {
            ReportPtr rep{s3, &jb_report_free};
            emit_report(rep.get(), out("robust_drop_models_3.json"), manifest);
          }
        }
      } else {
        checks.push_back({"weakest-model removal", "skipped", "model ids not recognized"});
      }
    }

    // Agreement metrics (+ optional gold), correlation, heatmap, debias.
    TablePtr gold{nullptr, &jb_table_free};
    if (!gold_path.empty()) {
      gold = load_table(gold_path, cfg.get(), /*aggregate=*/false);
      manifest.input_paths.push_back(gold_path);
    }
    jb_report* agree = nullptr;
    json ja;
    if (jb_agreement(table.get(), gold.get(), &agree) == JB_OK) {
      ReportPtr rep{agree, &jb_report_free};
      emit_report(rep.get(), out("agreement.json"), manifest);
      ja = report_json(rep.get());
    } else {
      checks.push_back({"agreement metrics", "skipped", jb_last_error()});
    }
    {
      jb_report* c = nullptr;
      check(jb_correlate(table.get(), &c));
      ReportPtr rep{c, &jb_report_free};
      emit_report(rep.get(), out("correlate.json"), manifest);
    }
    {
      jb_report* h = nullptr;
      check(jb_heatmap(table.get(), &h));
      ReportPtr rep{h, &jb_report_free};
      emit_report(rep.get(), out("heatmap.json"), manifest, /*heatmap=*/true);
    }
    {
      jb_table* deb = nullptr;
      check(jb_debias(table.get(), fit.get(), &deb));
      TablePtr dt{deb, &jb_table_free};
      const std::string path = out("debiased.csv");
      check(jb_table_write_csv(dt.get(), path.c_str()));
      manifest.output_paths.push_back(path);
    }

    // Quantitative checks against the published numbers.
    const auto near = [](double v, double target, double tol) {
      return std::abs(v - target) <= tol;
    };
    if (!ja.is_null()) {
      const auto& avg = ja.at("agreement").at("average");
      if (!avg.at("krippendorff_alpha").is_null()) {
        const double a = avg.at("krippendorff_alpha").get<double>();
        checks.push_back({"average Krippendorff alpha ~ 0.28",
                          near(a, 0.28, 0.01) ? "pass" : "fail", std::to_string(a)});
        any_fail |= !near(a, 0.28, 0.01);
      }
      if (!avg.at("observed_agreement").is_null()) {
        const double a = avg.at("observed_agreement").get<double>();
        checks.push_back({"average observed agreement ~ 0.81",
                          near(a, 0.81, 0.01) ? "pass" : "fail", std::to_string(a)});
        any_fail |= !near(a, 0.81, 0.01);
      }
      if (avg.contains("gold_accuracy")) {
        const double a = avg.at("gold_accuracy").get<double>();
        checks.push_back({"average gold accuracy ~ 0.91",
                          near(a, 0.91, 0.01) ? "pass" : "fail", std::to_string(a)});
        any_fail |= !near(a, 0.91, 0.01);
      } else {
        checks.push_back({"average gold accuracy ~ 0.91", "skipped", "no gold file"});
      }
    }

    const auto sign_check = [&](const std::vector<std::string>& needles, bool positive,
                                const std::string& label) {
      const auto id = find_id(judge_ids, needles);
      if (!id) {
        checks.push_back({label, "skipped", "id not recognized"});
        return;
      }
      const auto& w = models_j.at(*id);
      const bool reject = w.at("reject_zero").get<bool>();
      const double est = w.at("estimate").get<double>();
      const bool ok = reject && (positive ? est > 0 : est < 0);
      checks.push_back({label, ok ? "pass" : "fail",
                        *id + " estimate=" + std::to_string(est)});
      any_fail |= !ok;
    };
    sign_check({"gpt-4o"}, true, "positive self-bias: GPT-4o");
    sign_check({"claude", "3", "5"}, true, "positive self-bias: Claude 3.5 Sonnet");
    sign_check({"llama", "8b"}, false, "negative self-bias: Llama 3 8B");

    const auto& fam_j = jf.at("reports").at(0).at("family_bias");
    std::vector<std::string> fams;
    for (const auto& [k, v] : fam_j.items()) fams.push_back(k);
    for (const char* fam : {"gpt", "claude"}) {
      const auto id = find_id(fams, {fam});
      if (!id) {
        checks.push_back({std::string("positive family-bias: ") + fam, "skipped",
                          "family not recognized"});
        continue;
      }
      const auto& w = fam_j.at(*id);
      const bool ok = w.at("reject_zero").get<bool>() && w.at("estimate").get<double>() > 0;
      checks.push_back({std::string("positive family-bias: ") + fam, ok ? "pass" : "fail",
                        *id + " estimate=" + std::to_string(w.at("estimate").get<double>())});
      any_fail |= !ok;
    }
  }

  print_checks(checks);
  json summary = json::array();
  for (const auto& c : checks)
    summary.push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  const std::string summary_path = out("replicate_summary.json");
  {
    const std::string tmp = summary_path + ".tmp";
    std::ofstream outf(tmp, std::ios::binary | std::ios::trunc);
    outf << json{{"checks", summary}}.dump(2) << "\n";
    outf.close();
    std::filesystem::rename(tmp, summary_path);
  }
  manifest.output_paths.push_back(summary_path);
  manifest.write((std::filesystem::path(out_dir) / "manifest.json").string());
  return any_fail ? kExitError : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-bias and family-bias estimation for LLM judges"};
  app.require_subcommand(1);

  std::string config_path = env_config_default();
  std::string data_path, out_path, gold_path, by = "dimension";
  std::string robust_check, family, sim_config_path, labelmaps_path, in_path;
  std::string preset = "fig1", panel = "equal";
  std::vector<std::string> drop_models;
  long n = 2000;
  std::uint64_t seed = 7;
  double noise_sd = 0.1;
  int knots = 4;
  bool lenient = false;

  FitFlags fit_flags, slice_flags, robust_flags, debias_flags;

  auto* cmd_fit = app.add_subcommand("fit", "Estimate self- and family-bias");
  cmd_fit->add_option("--data", data_path, "Rating CSV/TSV file")->required();
  cmd_fit->add_option("--config", config_path, "Config JSON (env JUDGEBIAS_CONFIG)");
  cmd_fit->add_option("--out", out_path, "Output report JSON")->required();
  fit_flags.attach(cmd_fit);

  auto* cmd_slice = app.add_subcommand("slice", "Per-dimension or per-task fits");
  cmd_slice->add_option("--by", by, "dimension|task")
      ->required()
      ->check(CLI::IsMember({"dimension", "task"}));
  cmd_slice->add_option("--data", data_path)->required();
  cmd_slice->add_option("--config", config_path);
  cmd_slice->add_option("--out", out_path)->required();
  slice_flags.attach(cmd_slice);

  auto* cmd_robust = app.add_subcommand("robust", "Robustness checks");
  cmd_robust->add_option("--check", robust_check, "length|ordinal|gam|lofo|drop-models")
      ->required()
      ->check(CLI::IsMember({"length", "ordinal", "gam", "lofo", "drop-models"}));
  cmd_robust->add_option("--data", data_path)->required();
  cmd_robust->add_option("--config", config_path);
  cmd_robust->add_option("--out", out_path)->required();
  cmd_robust->add_option("--family", family, "Family for --check lofo (default: all)");
  cmd_robust->add_option("--drop", drop_models, "Models to drop for --check drop-models");
  cmd_robust->add_option("--knots", knots, "Interior knots for --check gam (default 4)");
  robust_flags.attach(cmd_robust);

  auto* cmd_agree = app.add_subcommand("agreement", "Annotation-quality metrics");
  cmd_agree->add_option("--data", data_path)->required();
  cmd_agree->add_option("--config", config_path);
  cmd_agree->add_option("--gold", gold_path, "Gold annotation CSV (3 expert passes)");
  cmd_agree->add_option("--out", out_path)->required();

  auto* cmd_corr = app.add_subcommand("correlate", "Judge-vs-reference rank correlation");
  cmd_corr->add_option("--data", data_path)->required();
  cmd_corr->add_option("--config", config_path);
  cmd_corr->add_option("--out", out_path)->required();

  auto* cmd_heat = app.add_subcommand("heatmap", "Judge x model mean-score matrix");
  cmd_heat->add_option("--data", data_path)->required();
  cmd_heat->add_option("--config", config_path);
  cmd_heat->add_option("--out", out_path)->required();

  auto* cmd_parse = app.add_subcommand("parse-judgments", "Parse raw judge transcripts");
  cmd_parse->add_option("--in", in_path, "Line-delimited JSON judgments")->required();
  cmd_parse->add_option("--labelmaps", labelmaps_path, "Label map JSON")->required();
  cmd_parse->add_option("--config", config_path);
  cmd_parse->add_option("--out", out_path, "Output rating CSV")->required();
  cmd_parse->add_flag("--lenient", lenient, "Accept near-miss answer labels");

  auto* cmd_sim = app.add_subcommand("simulate", "Generate synthetic rating data");
  cmd_sim->add_option("--preset", preset, "Preset generator (fig1)")
      ->check(CLI::IsMember({"fig1"}));
  cmd_sim->add_option("--panel", panel, "fig1 panel: lower|equal|higher")
      ->check(CLI::IsMember({"lower", "equal", "higher"}));
  cmd_sim->add_option("--sim-config", sim_config_path, "Generative model JSON (overrides preset)");
  cmd_sim->add_option("--n", n, "Number of prompts (default 2000)");
  cmd_sim->add_option("--seed", seed, "RNG seed (default 7)");
  cmd_sim->add_option("--noise", noise_sd, "Judge noise sd for the preset (default 0.1)");
  cmd_sim->add_option("--out", out_path, "Output rating CSV")->required();

  auto* cmd_debias = app.add_subcommand("debias", "Subtract fitted bias from judge scores");
  cmd_debias->add_option("--data", data_path)->required();
  cmd_debias->add_option("--config", config_path);
  cmd_debias->add_option("--out", out_path, "Output rating CSV")->required();
  debias_flags.attach(cmd_debias);

  auto* cmd_repl = app.add_subcommand("replicate", "Run the full analysis pipeline");
  cmd_repl->add_option("--out", out_path, "Output directory")->required();
  cmd_repl->add_option("--data", data_path, "Dataset rating CSV (omit for synthetic suite)");
  cmd_repl->add_option("--config", config_path);
  cmd_repl->add_option("--gold", gold_path);
  cmd_repl->add_option("--n", n, "Synthetic suite prompts (default 2000)");
  cmd_repl->add_option("--seed", seed, "Synthetic suite seed (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  Manifest manifest;
  manifest.config_path = config_path;

  try {
    const auto need_config = [&]() -> ConfigPtr {
      if (config_path.empty())
        throw CLI::ValidationError("--config (or JUDGEBIAS_CONFIG) is required");
      return load_config(config_path);
    };

    if (app.got_subcommand(cmd_fit) || app.got_subcommand(cmd_slice) ||
        app.got_subcommand(cmd_robust) || app.got_subcommand(cmd_debias)) {
      FitFlags& flags = app.got_subcommand(cmd_fit)     ? fit_flags
                        : app.got_subcommand(cmd_slice) ? slice_flags
                        : app.got_subcommand(cmd_robust) ? robust_flags
                                                         : debias_flags;
      auto cfg = need_config();
      auto table = load_table(data_path, cfg.get(), /*aggregate=*/true);
      manifest.input_paths.push_back(data_path);
      const std::string opts = flags.to_json(&manifest);

      if (app.got_subcommand(cmd_fit)) {
        manifest.command = "fit";
        jb_report* r = nullptr;
        check(jb_fit(table.get(), opts.c_str(), &r));
        ReportPtr rep{r, &jb_report_free};
        emit_report(rep.get(), out_path, manifest);
      } else if (app.got_subcommand(cmd_slice)) {
        manifest.command = "slice";
        manifest.options["by"] = by;
        jb_report* r = nullptr;
        check(jb_slice(table.get(), by.c_str(), opts.c_str(), &r));
        ReportPtr rep{r, &jb_report_free};
        emit_report(rep.get(), out_path, manifest);
      } else if (app.got_subcommand(cmd_robust)) {
        manifest.command = "robust";
        manifest.options["check"] = robust_check;
        json extra = json::parse(opts);
        if (!family.empty()) extra["family"] = family;
        if (!drop_models.empty()) extra["drop"] = drop_models;
        if (cmd_robust->count("--knots")) extra["interior_knots"] = knots;
        jb_report* r = nullptr;
        check(jb_robust(table.get(), robust_check.c_str(), extra.dump().c_str(), &r));
        ReportPtr rep{r, &jb_report_free};
        emit_report(rep.get(), out_path, manifest);
      } else {
        manifest.command = "debias";
        jb_report* r = nullptr;
        check(jb_fit(table.get(), opts.c_str(), &r));
        ReportPtr rep{r, &jb_report_free};
        jb_table* deb = nullptr;
        check(jb_debias(table.get(), rep.get(), &deb));
        TablePtr dt{deb, &jb_table_free};
        check(jb_table_write_csv(dt.get(), out_path.c_str()));
        manifest.output_paths.push_back(out_path);
        const std::string fit_out = swap_extension(out_path, ".fit.json");
        check(jb_report_write_json(rep.get(), fit_out.c_str()));
        manifest.output_paths.push_back(fit_out);
      }
    } else if (app.got_subcommand(cmd_agree)) {
      manifest.command = "agreement";
      auto cfg = need_config();
      auto table = load_table(data_path, cfg.get(), /*aggregate=*/false);
      manifest.input_paths.push_back(data_path);
      TablePtr gold{nullptr, &jb_table_free};
      if (!gold_path.empty()) {
        gold = load_table(gold_path, cfg.get(), /*aggregate=*/false);
        manifest.input_paths.push_back(gold_path);
      }
      jb_report* r = nullptr;
      check(jb_agreement(table.get(), gold.get(), &r));
      ReportPtr rep{r, &jb_report_free};
      emit_report(rep.get(), out_path, manifest);
    } else if (app.got_subcommand(cmd_corr)) {
      manifest.command = "correlate";
      auto cfg = need_config();
      auto table = load_table(data_path, cfg.get(), /*aggregate=*/true);
      manifest.input_paths.push_back(data_path);
      jb_report* r = nullptr;
      check(jb_correlate(table.get(), &r));
      ReportPtr rep{r, &jb_report_free};
      emit_report(rep.get(), out_path, manifest);
    } else if (app.got_subcommand(cmd_heat)) {
      manifest.command = "heatmap";
      auto cfg = need_config();
      auto table = load_table(data_path, cfg.get(), /*aggregate=*/false);
      manifest.input_paths.push_back(data_path);
      jb_report* r = nullptr;
      check(jb_heatmap(table.get(), &r));
      ReportPtr rep{r, &jb_report_free};
      emit_report(rep.get(), out_path, manifest, /*heatmap=*/true);
    } else if (app.got_subcommand(cmd_parse)) {
      manifest.command = "parse-judgments";
      auto cfg = need_config();
      manifest.input_paths.push_back(in_path);
      manifest.input_paths.push_back(labelmaps_path);
      manifest.options["lenient"] = lenient ? "true" : "false";
      size_t dropped = 0;
      jb_table* t = nullptr;
      check(jb_parse_judgments(in_path.c_str(), labelmaps_path.c_str(), cfg.get(),
                               lenient ? 0 : 1, &dropped, &t));
      TablePtr table{t, &jb_table_free};
      check(jb_table_write_csv(table.get(), out_path.c_str()));
      manifest.output_paths.push_back(out_path);
      if (dropped > 0)
        std::fprintf(stderr, "parse-judgments: dropped %zu malformed response(s)\n", dropped);
      manifest.options["dropped_responses"] = std::to_string(dropped);
    } else if (app.got_subcommand(cmd_sim)) {
      manifest.command = "simulate";
      manifest.seed = seed;
      manifest.options["n"] = std::to_string(n);
      jb_table* t = nullptr;
      if (!sim_config_path.empty()) {
        manifest.input_paths.push_back(sim_config_path);
        std::ifstream in(sim_config_path, std::ios::binary);
        if (!in) throw CliError("io: cannot open sim config " + sim_config_path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        check(jb_simulate(text.c_str(), &t));
      } else {
        manifest.options["preset"] = preset;
        manifest.options["panel"] = panel;
        const int panel_idx = panel == "lower" ? 0 : panel == "equal" ? 1 : 2;
        check(jb_simulate_quality_shift(n, seed, panel_idx, noise_sd, &t));
      }
      TablePtr table{t, &jb_table_free};
      check(jb_table_write_csv(table.get(), out_path.c_str()));
      manifest.output_paths.push_back(out_path);
      const std::string cfg_out = out_path + ".config.json";
      check(jb_table_write_config(table.get(), cfg_out.c_str()));
      manifest.output_paths.push_back(cfg_out);
    } else if (app.got_subcommand(cmd_repl)) {
      manifest.command = "replicate";
      manifest.seed = seed;
      manifest.options["n"] = std::to_string(n);
      return run_replicate(out_path, data_path, config_path, gold_path, n, seed, manifest);
    }

    if (!out_path.empty() && manifest.command != "replicate")
      manifest.write(out_path + ".manifest.json");
    return kExitOk;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}
