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

#include "ulsim/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ulsim/errors.hpp"
#include "ulsim/json_writer.hpp"
#include "ulsim/kernels.hpp"

namespace ulsim {

void AttackMode::validate(std::size_t num_classes) const {
  if (kind == Kind::kKnownCount && (k < 1 || k > num_classes))
    throw ConfigError("known_count k must be in 1.." + std::to_string(num_classes));
  if (!std::isfinite(tau)) throw ConfigError("tau must be finite");
}

const char* to_string(AttackMode::Kind kind) {
  return kind == AttackMode::Kind::kKnownCount ? "known_count" : "threshold";
}

AttackMode::Kind parse_mode_kind(const std::string& name) {
  if (name == "known_count") return AttackMode::Kind::kKnownCount;
  if (name == "threshold") return AttackMode::Kind::kThreshold;
  throw ConfigError("unknown attack mode '" + name + "'");
}

const char* to_string(AttackStatus status) {
  switch (status) {
    case AttackStatus::kOk: return "ok";
    case AttackStatus::kSingularity: return "singularity";
    case AttackStatus::kDegenerateHistory: return "degenerate_history";
  }
  return "?";
}

std::pair<ParamVector, ParamVector> param_deltas(const AttackInput& input) {
  require_same_layout(input.local_before, input.local_after);
  require_same_layout(input.local_before, input.global_before);
  require_same_layout(input.local_before, input.global_after);
  ParamVector dl(input.local_before.layout_ptr());
  ParamVector dg(input.local_before.layout_ptr());
  kernels::parallel::sub(input.local_after.values(), input.local_before.values(), dl.values());
  kernels::parallel::sub(input.global_after.values(), input.global_before.values(),
                         dg.values());
  return {std::move(dl), std::move(dg)};
}

double estimate_learning_rate(const FederationHistory& history, std::size_t target_client,
                              std::size_t window) {
  const std::size_t rounds = history.rounds.size();
  if (window == 0) window = rounds;
  if (window > rounds)
    throw ConfigError("attack window " + std::to_string(window) + " exceeds history length " +
                      std::to_string(rounds));
  if (rounds > 0 && target_client >= history.num_clients())
    throw InputError("target client out of range");

  double sum = 0.0;
  std::size_t used = 0;
  std::vector<double> scratch;
  for (std::size_t r = rounds - window; r < rounds; ++r) {
    const RoundRecord& rec = history.rounds[r];
    scratch.resize(rec.global_before.size());
    kernels::serial::sub(rec.global_after.values(), rec.global_before.values(), scratch);
    const double global_step = kernels::l2_norm(scratch);
    if (global_step < 1e-12) continue;
    kernels::serial::sub(rec.locals[target_client].values(), rec.global_before.values(),
                         scratch);
    sum += kernels::l2_norm(scratch) / global_step;
    ++used;
  }
  if (used == 0) throw DegenerateHistoryError("no usable round for learning-rate estimate");
  const double eta = sum / static_cast<double>(used);
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw DegenerateHistoryError("learning-rate estimate is not positive");
  return eta;
}

ParamVector derive_grad_diff(const ParamVector& delta_local, const ParamVector& delta_global,
                             double w_k, double eta_approx) {
  require_same_layout(delta_local, delta_global);
  if (!(w_k < 1.0 - 1e-9))
    throw SingularityError("target weight " + format_double(w_k) + " too close to 1");
  if (!(eta_approx > 0.0)) throw InputError("learning-rate estimate must be positive");
  ParamVector out(delta_local.layout_ptr());
  kernels::parallel::sub(delta_global.values(), delta_local.values(), out.values());
  const double scale = 1.0 / ((1.0 - w_k) * eta_approx);
  for (double& x : out.values()) x *= scale;
  return out;
}

std::vector<double> per_class_agd(const ParamVector& grad_diff) {
  const LayerLayout& layout = grad_diff.layout();
  std::vector<double> agd(layout.num_classes());
  for (std::size_t l = 0; l < agd.size(); ++l) {
    const auto& slice = layout.class_slice(l);
    double acc = 0.0;
    for (std::size_t i : slice) acc += std::abs(grad_diff[i]);
    agd[l] = acc / static_cast<double>(slice.size());
  }
  return agd;
}

std::vector<double> zscores(const std::vector<double>& agd) {
  const auto n = static_cast<double>(agd.size());
  std::vector<double> z(agd.size(), 0.0);
  if (agd.empty()) return z;
  const double mean = std::accumulate(agd.begin(), agd.end(), 0.0) / n;
  double var = 0.0;
  for (double a : agd) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-15) return z;
  for (std::size_t l = 0; l < agd.size(); ++l) z[l] = (agd[l] - mean) / sd;
  return z;
}

std::vector<int> select_candidates(const std::vector<double>& z, const AttackMode& mode) {
  std::vector<int> out;
  if (mode.kind == AttackMode::Kind::kThreshold) {
    for (std::size_t l = 0; l < z.size(); ++l)
      if (z[l] > mode.tau) out.push_back(static_cast<int>(l));
    return out;
  }
  std::vector<int> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return z[a] > z[b]; });
  order.resize(std::min(mode.k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

AttackReport run_attack(const AttackInput& input, const AttackMode& mode, std::size_t window) {
  if (input.history == nullptr) throw InputError("attack input has no history");
  const std::size_t num_classes = input.global_before.layout().num_classes();
  mode.validate(num_classes);

  AttackReport report;
  report.mode = mode;
  report.window = window == 0 ? input.history->rounds.size() : window;
  report.target_client = input.target_client;
  report.w_k = input.w_k;
  auto [dl, dg] = param_deltas(input);
  report.delta_local = std::move(dl);
  report.delta_global = std::move(dg);
  try {
    report.eta_approx = estimate_learning_rate(*input.history, input.target_client, window);
    report.grad_diff =
        derive_grad_diff(report.delta_local, report.delta_global, input.w_k, report.eta_approx);
  } catch (const SingularityError& e) {
    report.status = AttackStatus::kSingularity;
    report.error = e.what();
    return report;
  } catch (const DegenerateHistoryError& e) {
    report.status = AttackStatus::kDegenerateHistory;
    report.error = e.what();
    return report;
  }
  report.agd = per_class_agd(report.grad_diff);
  report.zscores = zscores(report.agd);
  report.candidates = select_candidates(report.zscores, mode);
  return report;
}

std::string to_json(const AttackReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("status").value(to_string(report.status));
  w.key("error").value(report.error);
  w.key("mode").begin_object();
  w.key("kind").value(to_string(report.mode.kind));
  w.key("k").value(static_cast<std::uint64_t>(report.mode.k));
  w.key("tau").value(report.mode.tau);
  w.end_object();
  w.key("window").value(static_cast<std::uint64_t>(report.window));
  w.key("target_client").value(static_cast<std::uint64_t>(report.target_client));
  w.key("w_k").value(report.w_k);
  w.key("eta_approx");
  if (report.ok()) w.value(report.eta_approx); else w.null();
  w.key("candidates").array(std::span<const int>(report.candidates));
  w.key("agd").array(std::span<const double>(report.agd));
  w.key("zscores").array(std::span<const double>(report.zscores));
  auto vec = [&](const char* name, const ParamVector& v) {
    w.key(name);
    if (v.layout_ptr()) w.array(v.values()); else w.begin_array().end_array();
  };
  vec("delta_local", report.delta_local);
  vec("delta_global", report.delta_global);
  vec("grad_diff", report.grad_diff);
  w.end_object();
  return w.str() + "\n";
}

}  // namespace ulsim
