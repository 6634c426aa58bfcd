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

#include "ulsim/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "ulsim/errors.hpp"
#include "ulsim/json_writer.hpp"

namespace ulsim {

const char* to_string(Distribution d) {
  return d == Distribution::kIid ? "iid" : "dirichlet";
}

Distribution parse_distribution(const std::string& name) {
  if (name == "iid") return Distribution::kIid;
  if (name == "dirichlet") return Distribution::kDirichlet;
  throw ConfigError("unknown distribution '" + name + "'");
}

void SweepAxes::validate() const {
  auto need = [](bool empty, const char* axis) {
    if (empty) throw ConfigError(std::string("sweep axis '") + axis + "' is empty");
  };
  need(methods.empty(), "method");
  need(levels.empty(), "level");
  need(num_labels.empty(), "num_label_categories");
  need(fractions.empty(), "forgotten_fraction");
  need(distributions.empty(), "distribution");
  need(modes.empty(), "mode");
  need(taus.empty(), "tau");
  for (std::size_t l : num_labels)
    if (l == 0) throw ConfigError("num_label_categories must be positive");
  for (double f : fractions)
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("forgotten_fraction must be in (0, 1)");
  for (double t : taus)
    if (!std::isfinite(t)) throw ConfigError("tau must be finite");
}

std::vector<GridPoint> SweepAxes::points() const {
  std::vector<GridPoint> out;
  for (auto method : methods)
    for (auto level : levels)
      for (auto l : num_labels)
        for (auto fraction : fractions)
          for (auto dist : distributions)
            for (auto mode : modes)
              for (auto tau : taus) out.push_back({method, level, l, fraction, dist, mode, tau});
  return out;
}

namespace {

std::vector<int> pick_labels(std::vector<int> pool, std::size_t count, Rng& rng) {
  if (count > pool.size())
    throw InputError("cannot pick " + std::to_string(count) + " of " +
                     std::to_string(pool.size()) + " label categories");
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t pick_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

Scenario prepare_scenario(const ExperimentSetup& setup, const GridPoint& point,
                          std::uint64_t seed) {
  Scenario s;
  s.fl = setup.fl;
  s.fl.seed = seed;
  s.data = setup.fixed_dataset ? setup.fixed_dataset
                               : std::make_shared<const Dataset>(
                                     gen_synthetic(setup.synthetic, seed));
  const Dataset& data = *s.data;
  if (point.num_labels == 0 || point.num_labels >= data.num_classes)
    throw ConfigError("num_label_categories must be in 1.." +
                      std::to_string(data.num_classes - 1));
  s.partition = point.distribution == Distribution::kIid
                    ? partition_iid(data.size(), s.fl.num_clients, seed)
                    : partition_dirichlet(data, s.fl.num_clients, setup.dirichlet_alpha, seed);

  Rng rng = make_rng({seed, stream::kScenario});
  std::vector<int> all_labels(data.num_classes);
  std::iota(all_labels.begin(), all_labels.end(), 0);
  UnlearningRequest& req = s.request;
  req.level = point.level;
  switch (point.level) {
    case UnlearnLevel::kSample: {
      std::vector<std::size_t> eligible;
      for (std::size_t c = 0; c < s.partition.num_clients(); ++c)
        if (client_labels(s.partition, data, c).size() >= point.num_labels)
          eligible.push_back(c);
      if (eligible.empty())
        throw InputError("no client holds " + std::to_string(point.num_labels) + " classes");
      req.target_client = eligible[pick_index(eligible.size(), rng)];
      s.true_labels =
          pick_labels(client_labels(s.partition, data, req.target_client), point.num_labels, rng);
      req.sample_ids = select_forgotten_samples(s.partition, data, req.target_client,
                                                s.true_labels, point.forgotten_fraction, rng);
      break;
    }
    case UnlearnLevel::kClass:
      req.target_client = pick_index(s.partition.num_clients(), rng);
      s.true_labels = pick_labels(all_labels, point.num_labels, rng);
      req.classes = s.true_labels;
      break;
    case UnlearnLevel::kClient: {
      req.target_client = pick_index(s.partition.num_clients(), rng);
      const auto classes = pick_labels(all_labels, point.num_labels, rng);
      s.partition = assign_target_classes(s.partition, data, req.target_client, classes, rng);
      s.true_labels = client_labels(s.partition, data, req.target_client);
      break;
    }
  }
  return s;
}

AttackInput make_attack_input(const FederationHistory& history, const UnlearnOutcome& outcome,
                              const UnlearningRequest& request) {
  AttackInput in;
  const std::size_t k = request.target_client;
  in.history = &history;
  in.target_client = k;
  in.global_before = history.final_global();
  in.global_after = outcome.global_after;
  in.local_after = outcome.target_local_after;
  if (history.rounds.empty()) {
    in.local_before = history.initial;
  } else {
    in.local_before = history.rounds.back().locals.at(k);
    in.w_k = history.rounds.back().weights.at(k);
  }
  return in;
}

AttackMode attack_mode_for(const GridPoint& point, std::size_t true_count) {
  if (point.mode == AttackMode::Kind::kKnownCount)
    return AttackMode::known_count(std::max<std::size_t>(1, true_count));
  return AttackMode::threshold(point.tau);
}

double iou_asr(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty()) throw InputError("true label set is empty");
  std::set<int> t(truth.begin(), truth.end());
  std::set<int> p(predicted.begin(), predicted.end());
  std::size_t inter = 0;
  for (int x : p) inter += t.contains(x);
  const std::size_t uni = t.size() + p.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void summarize(ExperimentResult& result) {
  const auto n = static_cast<double>(result.trials.size());
  result.failures = 0;
  double sum = 0.0;
  for (const auto& t : result.trials) {
    sum += t.asr;
    result.failures += t.failed;
  }
  result.mean_asr = n > 0 ? sum / n : 0.0;
  double var = 0.0;
  for (const auto& t : result.trials) var += (t.asr - result.mean_asr) * (t.asr - result.mean_asr);
  result.std_asr = n > 0 ? std::sqrt(var / n) : 0.0;
}

namespace {

// One trained federation per (scenario, trial), attacked under every method.
struct ScenarioKey {
  UnlearnLevel level;
  std::size_t num_labels;
  double fraction;  // 0 unless sample level
  Distribution distribution;
  auto operator<=>(const ScenarioKey&) const = default;
};

struct MethodRun {
  bool failed = false;
  std::string error;
  std::vector<double> z;
};

struct Unit {
  bool failed = false;
  std::string error;
  std::size_t target = 0;
  std::vector<int> truth;
  std::vector<MethodRun> runs;  // parallel to the group's methods
};

ScenarioKey key_of(const GridPoint& p) {
  return {p.level, p.num_labels, p.level == UnlearnLevel::kSample ? p.forgotten_fraction : 0.0,
          p.distribution};
}

Unit run_unit(const ExperimentSetup& setup, const GridPoint& point,
              const std::vector<UnlearnMethod>& methods, std::uint64_t seed) {
  Unit unit;
  unit.runs.resize(methods.size());
  try {
    const Scenario s = prepare_scenario(setup, point, seed);
    unit.truth = s.true_labels;
    unit.target = s.request.target_client;
    const LayoutPtr layout = make_layout(*s.data, setup.hidden);
    const FederationHistory history =
        run_fl(*s.data, s.partition, s.fl, init_params(layout, seed));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      MethodRun& run = unit.runs[m];
      try {
        const UnlearnOutcome outcome =
            unlearn(methods[m], history, *s.data, s.partition, s.request, s.fl, setup.unlearn);
        const AttackReport report = run_attack(make_attack_input(history, outcome, s.request),
                                               AttackMode::threshold(), setup.window);
        if (!report.ok()) {
          run.failed = true;
          run.error = report.error;
        } else {
          run.z = report.zscores;
        }
      } catch (const std::exception& e) {
        run.failed = true;
        run.error = e.what();
      }
    }
  } catch (const std::exception& e) {
    unit.failed = true;
    unit.error = e.what();
  }
  return unit;
}

}  // namespace

std::vector<ExperimentResult> sweep(const ExperimentSetup& setup, const SweepAxes& axes,
                                    std::size_t trials, std::uint64_t base_seed,
                                    std::size_t workers) {
  axes.validate();
  if (trials == 0) throw ConfigError("trials must be positive");
  const std::vector<GridPoint> points = axes.points();

  std::map<ScenarioKey, std::size_t> group_of;
  std::vector<GridPoint> group_point;
  std::vector<std::vector<UnlearnMethod>> group_methods;
  for (const auto& p : points) {
    auto [it, fresh] = group_of.try_emplace(key_of(p), group_point.size());
    if (fresh) {
      group_point.push_back(p);
      group_methods.emplace_back();
    }
    auto& ms = group_methods[it->second];
    if (std::find(ms.begin(), ms.end(), p.method) == ms.end()) ms.push_back(p.method);
  }

  const std::size_t num_units = group_point.size() * trials;
  std::vector<Unit> units(num_units);
  const int threads = workers == 0 ? omp_get_max_threads() : static_cast<int>(workers);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t u = 0; u < static_cast<std::int64_t>(num_units); ++u) {
    const std::size_t g = static_cast<std::size_t>(u) / trials;
    const std::size_t t = static_cast<std::size_t>(u) % trials;
    units[u] = run_unit(setup, group_point[g], group_methods[g], base_seed + t);
  }

  std::vector<ExperimentResult> results;
  results.reserve(points.size());
  for (const auto& p : points) {
    const std::size_t g = group_of.at(key_of(p));
    const auto& ms = group_methods[g];
    const std::size_t m = std::find(ms.begin(), ms.end(), p.method) - ms.begin();
    ExperimentResult r;
    r.point = p;
    for (std::size_t t = 0; t < trials; ++t) {
      const Unit& unit = units[g * trials + t];
      TrialResult tr;
      tr.index = t;
      tr.seed = base_seed + t;
      tr.target_client = unit.target;
      tr.true_labels = unit.truth;
      if (unit.failed || unit.runs[m].failed) {
        tr.failed = true;
        tr.error = unit.failed ? unit.error : unit.runs[m].error;
      } else {
        tr.predicted_labels =
            select_candidates(unit.runs[m].z, attack_mode_for(p, unit.truth.size()));
        tr.asr = iou_asr(tr.true_labels, tr.predicted_labels);
      }
      r.trials.push_back(std::move(tr));
    }
    summarize(r);
    results.push_back(std::move(r));
  }
  return results;
}

ExperimentResult run_trials(const ExperimentSetup& setup, const GridPoint& point,
                            std::size_t trials, std::uint64_t base_seed, std::size_t workers) {
  SweepAxes axes{{point.method}, {point.level},        {point.num_labels}, {point.forgotten_fraction},
                 {point.distribution}, {point.mode}, {point.tau}};
  return sweep(setup, axes, trials, base_seed, workers).front();
}

namespace {

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::string out = std::string(kResultsCsvHeader) + "\n";
  for (const auto& r : results) {
    const GridPoint& p = r.point;
    out += std::string(to_string(p.method)) + "," + to_string(p.level) + "," +
           std::to_string(p.num_labels) + "," + short_double(p.forgotten_fraction) + "," +
           short_double(p.tau) + "," + to_string(p.distribution) + "," + to_string(p.mode) +
           "," + std::to_string(r.trials.size()) + "," + fixed6(r.mean_asr) + "," +
           fixed6(r.std_asr) + "," + std::to_string(r.failures) + "\n";
  }
  return out;
}

std::string trials_jsonl(const std::vector<ExperimentResult>& results) {
  std::string out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const GridPoint& p = results[i].point;
    for (const auto& t : results[i].trials) {
      JsonWriter w;
      w.begin_object();
      w.key("point").value(static_cast<std::uint64_t>(i));
      w.key("method").value(to_string(p.method));
      w.key("level").value(to_string(p.level));
      w.key("num_label_categories").value(static_cast<std::uint64_t>(p.num_labels));
      w.key("forgotten_fraction").value(p.forgotten_fraction);
      w.key("tau").value(p.tau);
      w.key("distribution").value(to_string(p.distribution));
      w.key("mode").value(to_string(p.mode));
      w.key("trial").value(static_cast<std::uint64_t>(t.index));
      w.key("seed").value(t.seed);
      w.key("target_client").value(static_cast<std::uint64_t>(t.target_client));
      w.key("true_labels").array(std::span<const int>(t.true_labels));
      w.key("predicted_labels").array(std::span<const int>(t.predicted_labels));
      w.key("asr").value(t.asr);
      w.key("failed").value(t.failed);
      w.key("error").value(t.error);
      w.end_object();
      out += w.str() + "\n";
    }
  }
  return out;
}

std::string results_table(const std::vector<ExperimentResult>& results) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-7s %2s %9s %5s %-10s %-12s %6s %9s %9s %5s\n",
                "method", "level", "L", "fraction", "tau", "dist", "mode", "trials", "mean_asr",
                "std_asr", "fail");
  out += line;
  for (const auto& r : results) {
    const GridPoint& p = r.point;
    std::snprintf(line, sizeof line, "%-10s %-7s %2zu %9g %5g %-10s %-12s %6zu %9.4f %9.4f %5zu\n",
                  to_string(p.method), to_string(p.level), p.num_labels, p.forgotten_fraction,
                  p.tau, to_string(p.distribution), to_string(p.mode), r.trials.size(),
                  r.mean_asr, r.std_asr, r.failures);
    out += line;
  }
  return out;
}

EfficacyResult evaluate_class_unlearning(const ExperimentSetup& setup, UnlearnMethod method,
                                         std::size_t num_labels, std::uint64_t seed) {
  GridPoint point;
  point.method = method;
  point.level = UnlearnLevel::kClass;
  point.num_labels = num_labels;
  const Scenario s = prepare_scenario(setup, point, seed);
  const LayoutPtr layout = make_layout(*s.data, setup.hidden);
  const FederationHistory history = run_fl(*s.data, s.partition, s.fl, init_params(layout, seed));
  const UnlearnOutcome outcome =
      unlearn(method, history, *s.data, s.partition, s.request, s.fl, setup.unlearn);

  std::vector<std::size_t> forgotten, retained;
  const std::set<int> classes(s.true_labels.begin(), s.true_labels.end());
  for (std::size_t i = 0; i < s.data->size(); ++i)
    (classes.contains(s.data->labels[i]) ? forgotten : retained).push_back(i);
  EfficacyResult r;
  r.forgotten_before = accuracy(history.final_global(), *s.data, forgotten);
  r.forgotten_after = accuracy(outcome.global_after, *s.data, forgotten);
  r.retained_before = accuracy(history.final_global(), *s.data, retained);
  r.retained_after = accuracy(outcome.global_after, *s.data, retained);
  return r;
}

}  // namespace ulsim
