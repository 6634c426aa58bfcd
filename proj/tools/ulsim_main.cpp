/*
 * Copyright 2026 The ulsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// ulsim: train, unlearn, attack and experiment driver.
//
// Exit codes: 0 success (attack failures are reported in the JSON),
// 1 usage or config error, 2 I/O or format error.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ulsim/attack.hpp"
#include "ulsim/config.hpp"
#include "ulsim/errors.hpp"
#include "ulsim/eval.hpp"
#include "ulsim/federation.hpp"
#include "ulsim/json_writer.hpp"
#include "ulsim/param_io.hpp"
#include "ulsim/unlearning.hpp"

namespace fs = std::filesystem;
using namespace ulsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct Options {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> tau;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::string history_path;
  std::string unlearn_path;
  std::string results_path;
};

RunConfig resolve_config(const Options& o) {
  if (!o.config_path.empty() && !o.preset.empty())
    throw ConfigError("--config and --preset are mutually exclusive");
  RunConfig c;
  if (!o.config_path.empty()) c = load_config(o.config_path);
  if (!o.preset.empty()) c = load_preset(o.preset);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.tau) {
    c.tau = *o.tau;
    if (c.has_axes) c.axes.taus = {*o.tau};
  }
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.output_dir = *o.out;
  c.validate();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out(const RunConfig& c) {
  fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

// Timestamps and host names live here, never in canonical outputs.
void write_meta(const fs::path& dir, const std::string& command) {
  char host[256] = {0};
  gethostname(host, sizeof(host) - 1);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  JsonWriter w;
  w.begin_object();
  w.key("command");
  w.value(command);
  w.key("timestamp");
  w.value(stamp);
  w.key("hostname");
  w.value(host);
  w.end_object();
  write_text(dir / "meta.json", w.str() + "\n");
}

// Everything a single-point command derives from the config.
struct Run {
  ExperimentSetup setup;
  GridPoint point;
  Scenario scenario;
  ParamVector initial;
};

Run build_run(const RunConfig& c) {
  Run r;
  r.setup = make_setup(c);
  r.point = single_point(c);
  r.scenario = prepare_scenario(r.setup, r.point, c.seed);
  r.initial = init_params(make_layout(*r.scenario.data, r.setup.hidden), c.seed);
  return r;
}

std::string history_metadata(const RunConfig& c) {
  JsonWriter w;
  w.begin_object();
  w.key("seed");
  w.value(static_cast<std::uint64_t>(c.seed));
  w.key("num_clients");
  w.value(static_cast<std::uint64_t>(c.fl.num_clients));
  w.key("rounds");
  w.value(static_cast<std::uint64_t>(c.fl.rounds));
  w.key("learning_rate");
  w.value(c.fl.learning_rate);
  w.end_object();
  return w.str();
}

FederationHistory train(const Run& r) {
  return run_fl(*r.scenario.data, r.scenario.partition, r.scenario.fl, r.initial);
}

FederationHistory load_history(const std::string& path, const Run& r) {
  FederationHistory h = history_from_file(read_param_file(path));
  if (!same_layout(h.initial, r.initial))
    throw FormatError(path + ": parameter layout does not match the config");
  if (h.num_clients() != 0 && h.num_clients() != r.scenario.partition.num_clients())
    throw FormatError(path + ": client count does not match the config");
  return h;
}

UnlearnOutcome run_unlearn(const RunConfig& c, const Run& r, const FederationHistory& h) {
  return unlearn(c.method, h, *r.scenario.data, r.scenario.partition, r.scenario.request,
                 r.scenario.fl, c.unlearn);
}

std::string default_path(const RunConfig& c, const std::string& given, const char* name) {
  return given.empty() ? (fs::path(c.output_dir) / name).string() : given;
}

int cmd_train(const RunConfig& c) {
  const Run r = build_run(c);
  const FederationHistory h = train(r);
  const fs::path dir = prepare_out(c);
  write_param_file((dir / "history.bin").string(), history_to_file(h, history_metadata(c)));

  const Dataset& data = *r.scenario.data;
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Batch batch = gather(data, all);
  JsonWriter w;
  w.begin_object();
  w.key("rounds");
  w.value(static_cast<std::uint64_t>(h.rounds.size()));
  w.key("initial_loss");
  w.value(loss(h.initial, batch));
  w.key("final_loss");
  w.value(loss(h.final_global(), batch));
  w.key("final_accuracy");
  w.value(accuracy(h.final_global(), data, all));
  w.key("target_client");
  w.value(static_cast<std::uint64_t>(r.scenario.request.target_client));
  w.end_object();
  write_text(dir / "train_summary.json", w.str() + "\n");
  write_meta(dir, "train");
  std::cout << w.str() << "\n";
  return kExitOk;
}

int cmd_unlearn(const RunConfig& c, const Options& o) {
  const Run r = build_run(c);
  const std::string hist_path = default_path(c, o.history_path, "history.bin");
  const FederationHistory h =
      o.history_path.empty() && !fs::exists(hist_path) ? train(r) : load_history(hist_path, r);
  const UnlearnOutcome out = run_unlearn(c, r, h);
  const fs::path dir = prepare_out(c);
  JsonWriter w;
  w.begin_object();
  w.key("method");
  w.value(to_string(c.method));
  w.key("level");
  w.value(to_string(c.level));
  w.end_object();
  write_param_file((dir / "unlearn.bin").string(),
                   outcome_to_file(out, r.scenario.request.target_client, w.str()));
  write_meta(dir, "unlearn");
  return kExitOk;
}

int cmd_attack(const RunConfig& c, const Options& o) {
  const Run r = build_run(c);
  FederationHistory h;
  UnlearnOutcome out;
  if (!o.history_path.empty()) {
    h = load_history(o.history_path, r);
  } else {
    h = train(r);
  }
  if (!o.unlearn_path.empty()) {
    out = outcome_from_file(read_param_file(o.unlearn_path));
    if (!same_layout(out.global_after, r.initial))
      throw FormatError(o.unlearn_path + ": parameter layout does not match the config");
  } else {
    out = run_unlearn(c, r, h);
  }
  const AttackMode mode = attack_mode_for(r.point, r.scenario.true_labels.size());
  const AttackReport report =
      run_attack(make_attack_input(h, out, r.scenario.request), mode, c.window);
  const fs::path dir = prepare_out(c);
  const std::string json = to_json(report);
  write_text(dir / "report.json", json);
  write_meta(dir, "attack");
  std::cout << "status: " << to_string(report.status) << "\ncandidates:";
  for (int l : report.candidates) std::cout << " " << l;
  std::cout << "\ntrue labels:";
  for (int l : r.scenario.true_labels) std::cout << " " << l;
  std::cout << "\n";
  return kExitOk;
}

int cmd_experiment(const RunConfig& c) {
  const SweepAxes axes = effective_axes(c);
  const std::vector<ExperimentResult> results =
      sweep(make_setup(c), axes, c.trials, c.seed, c.workers);
  const fs::path dir = prepare_out(c);
  write_text(dir / "results.csv", results_csv(results));
  write_text(dir / "trials.jsonl", trials_jsonl(results));
  write_meta(dir, "experiment");
  std::cout << results_table(results);
  return kExitOk;
}

// Re-renders a results CSV as an aligned table.
int cmd_report(const RunConfig& c, const Options& o) {
  const std::string path = default_path(c, o.results_path, "results.csv");
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError(path + ": empty results file");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kResultsCsvHeader) throw FormatError(path + ": unexpected header");
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    if (row.size() != width.size()) throw FormatError(path + ": ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::cout << (i ? "  " : "") << row[i] << std::string(width[i] - row[i].size(), ' ');
    std::cout << "\n";
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "Config file (JSON)");
  sub->add_option("--preset", o.preset, "Named preset: table1, table2, table3, fig2");
  sub->add_option("--seed", o.seed, "Override the seed");
  sub->add_option("--trials", o.trials, "Override the trial count");
  sub->add_option("--tau", o.tau, "Override the significance threshold");
  sub->add_option("--workers", o.workers, "Worker threads (0: all processors)");
  sub->add_option("--out", o.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated unlearning label-inference simulator"};
  app.require_subcommand(1);
  Options o;
  CLI::App* train_cmd = app.add_subcommand("train", "Run federated training, save the history");
  CLI::App* unlearn_cmd = app.add_subcommand("unlearn", "Unlearn from a saved or fresh history");
  CLI::App* attack_cmd = app.add_subcommand("attack", "Infer the forgotten labels");
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Run a multi-trial sweep");
  CLI::App* report_cmd = app.add_subcommand("report", "Print a saved results table");
  for (CLI::App* sub : {train_cmd, unlearn_cmd, attack_cmd, exp_cmd, report_cmd})
    add_common(sub, o);
  unlearn_cmd->add_option("--history", o.history_path, "Saved history (default: OUT/history.bin)");
  attack_cmd->add_option("--history", o.history_path, "Saved history");
  attack_cmd->add_option("--unlearn", o.unlearn_path, "Saved unlearning outcome");
  report_cmd->add_option("--results", o.results_path, "Results CSV (default: OUT/results.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const RunConfig c = resolve_config(o);
    if (train_cmd->parsed()) return cmd_train(c);
    if (unlearn_cmd->parsed()) return cmd_unlearn(c, o);
    if (attack_cmd->parsed()) return cmd_attack(c, o);
    if (exp_cmd->parsed()) return cmd_experiment(c);
    return cmd_report(c, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
