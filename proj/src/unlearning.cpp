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

#include "ulsim/unlearning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ulsim/errors.hpp"
#include "ulsim/kernels.hpp"

namespace ulsim {

const char* to_string(UnlearnMethod method) {
  switch (method) {
    case UnlearnMethod::kFedEraser: return "federaser";
    case UnlearnMethod::kRetrain: return "retrain";
    case UnlearnMethod::kSgaEwc: return "sga_ewc";
  }
  return "?";
}

UnlearnMethod parse_method(const std::string& name) {
  if (name == "federaser") return UnlearnMethod::kFedEraser;
  if (name == "retrain") return UnlearnMethod::kRetrain;
  if (name == "sga_ewc") return UnlearnMethod::kSgaEwc;
  throw ConfigError("unknown unlearning method '" + name + "'");
}

void UnlearnParams::validate(const FLConfig& config) const {
  if (calib_epochs == 0 || calib_epochs > config.local_epochs)
    throw ConfigError("unlearning.calib_epochs must be in 1..local_epochs");
  if (!(lambda_ewc >= 0.0) || !std::isfinite(lambda_ewc))
    throw ConfigError("unlearning.lambda_ewc must be non-negative");
  if (fisher_samples == 0) throw ConfigError("unlearning.fisher_samples must be positive");
}

ParamVector post_unlearning_local(const FederationHistory& history, const Dataset& data,
                                  const Partition& retained,
                                  const UnlearningRequest& request,
                                  const FLConfig& config, const ParamVector& global_after) {
  const auto& held = retained.clients.at(request.target_client);
  if (request.level == UnlearnLevel::kClient || held.empty()) return global_after;
  const std::size_t round = history.rounds.empty() ? 0 : history.rounds.size() - 1;
  const ParamVector& base =
      history.rounds.empty() ? history.initial : history.rounds.back().global_before;
  Rng rng = batch_rng(config.seed, stream::kBatchOrder, round, request.target_client);
  return local_update(base, data, held, config, rng);
}

UnlearnOutcome unlearn_federaser(const FederationHistory& history, const Dataset& data,
                                 const Partition& partition,
                                 const UnlearningRequest& request, const FLConfig& config,
                                 const UnlearnParams& params) {
  config.validate();
  params.validate(config);
  if (history.rounds.empty()) throw InputError("FedEraser needs a non-empty history");
  Partition retained = apply_request(partition, data, request);
  const std::vector<double> weights = client_weights(retained);

  FLConfig calib = config;
  calib.local_epochs = params.calib_epochs;

  ParamVector global = history.initial;
  const auto n = static_cast<std::int64_t>(retained.num_clients());
  for (const RoundRecord& rec : history.rounds) {
    std::vector<ParamVector> replayed(retained.num_clients(), ParamVector(global.layout_ptr()));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& held = retained.clients[i];
      if (held.empty()) continue;
      Rng rng = batch_rng(config.seed, stream::kBatchOrder, rec.round,
                          static_cast<std::size_t>(i));
      ParamVector step(global.layout_ptr());
      kernels::parallel::sub(local_update(global, data, held, calib, rng).values(),
                             global.values(), step.values());
      ParamVector stored(global.layout_ptr());
      kernels::parallel::sub(rec.locals[i].values(), rec.global_before.values(),
                             stored.values());
      const double step_norm = kernels::l2_norm(step.values());
      if (step_norm > 0.0)
        kernels::parallel::axpy(kernels::l2_norm(stored.values()) / step_norm,
                                step.values(), replayed[i].values());
    }
    ParamVector update = aggregate(replayed, weights);
    kernels::parallel::axpy(1.0, update.values(), global.values());
  }

  UnlearnOutcome out;
  out.target_local_after =
      post_unlearning_local(history, data, retained, request, config, global);
  out.global_after = std::move(global);
  out.retained_partition = std::move(retained);
  out.method = UnlearnMethod::kFedEraser;
  out.rounds_used = history.rounds.size();
  return out;
}

UnlearnOutcome unlearn_retrain(const FederationHistory& history, const Dataset& data,
                               const Partition& partition,
                               const UnlearningRequest& request, const FLConfig& config) {
  Partition retained = apply_request(partition, data, request);
  FederationHistory fresh = run_fl(data, retained, config, history.initial);

  UnlearnOutcome out;
  out.global_after = fresh.final_global();
  out.target_local_after =
      post_unlearning_local(history, data, retained, request, config, out.global_after);
  out.retained_partition = std::move(retained);
  out.method = UnlearnMethod::kRetrain;
  out.rounds_used = config.rounds;
  return out;
}

ParamVector diagonal_fisher(const ParamVector& params, const Dataset& data,
                            std::span<const std::size_t> indices) {
  ParamVector fisher(params.layout_ptr());
  if (indices.empty()) return fisher;
  auto f = fisher.values();
  for (std::size_t idx : indices) {
    const LossAndGrad lg = loss_and_grad(params, gather(data, {&idx, 1}));
    auto g = lg.grad.values();
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += g[j] * g[j];
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (double& x : f) x *= inv;
  return fisher;
}

UnlearnOutcome unlearn_sga_ewc(const FederationHistory& history, const Dataset& data,
                               const Partition& partition,
                               const UnlearningRequest& request, const FLConfig& config,
                               const UnlearnParams& params) {
  config.validate();
  params.validate(config);
  Partition retained = apply_request(partition, data, request);
  const std::vector<std::size_t> forgotten = forgotten_samples(partition, data, request);
  if (forgotten.empty()) throw InputError("SGA-EWC: request resolves to no forgotten samples");

  const ParamVector& anchor = history.final_global();
  std::vector<std::size_t> pool;
  for (const auto& c : retained.clients) pool.insert(pool.end(), c.begin(), c.end());
  std::sort(pool.begin(), pool.end());
  Rng rng = make_rng({config.seed, stream::kFisher});
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(pool.size(), params.fisher_samples));
  const ParamVector fisher = diagonal_fisher(anchor, data, pool);

  // Ascent on the forgotten loss; the quadratic EWC pull is taken implicitly,
  // theta <- (theta + eta*g + eta*lambda*F*anchor) / (1 + eta*lambda*F),
  // which stays stable for arbitrarily large lambda.
  const double eta = config.learning_rate;
  const Batch forgotten_batch = gather(data, forgotten);
  ParamVector theta = anchor;
  auto t = theta.values();
  auto a = anchor.values();
  auto f = fisher.values();
  for (std::size_t s = 0; s < params.ascent_steps; ++s) {
    const LossAndGrad lg = loss_and_grad(theta, forgotten_batch);
    auto g = lg.grad.values();
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double pull = eta * params.lambda_ewc * f[j];
      t[j] = (t[j] + eta * g[j] + pull * a[j]) / (1.0 + pull);
    }
  }

  if (params.fine_tune_rounds > 0) {
    FLConfig tune = config;
    tune.rounds = params.fine_tune_rounds;
    theta = run_fl(data, retained, tune, theta, stream::kFineTune).final_global();
  }

  UnlearnOutcome out;
  out.target_local_after =
      post_unlearning_local(history, data, retained, request, config, theta);
  out.global_after = std::move(theta);
  out.retained_partition = std::move(retained);
  out.method = UnlearnMethod::kSgaEwc;
  out.rounds_used = params.fine_tune_rounds;
  return out;
}

UnlearnOutcome unlearn(UnlearnMethod method, const FederationHistory& history,
                       const Dataset& data, const Partition& partition,
                       const UnlearningRequest& request, const FLConfig& config,
                       const UnlearnParams& params) {
  switch (method) {
    case UnlearnMethod::kFedEraser:
      return unlearn_federaser(history, data, partition, request, config, params);
    case UnlearnMethod::kRetrain:
      return unlearn_retrain(history, data, partition, request, config);
    case UnlearnMethod::kSgaEwc:
      return unlearn_sga_ewc(history, data, partition, request, config, params);
  }
  throw ConfigError("unknown unlearning method");
}

ParamFile outcome_to_file(const UnlearnOutcome& outcome, std::size_t target_client,
                          std::string metadata) {
  ParamFile file;
  file.kind = ParamFileKind::kUnlearnOutcome;
  file.metadata = std::move(metadata);
  for (auto d : outcome.global_after.layout().dims()) file.layer_dims.push_back(d);
  const auto rounds = static_cast<std::uint32_t>(outcome.rounds_used);
  file.entries.push_back({rounds, -1, EntryRole::kUnlearnGlobal, outcome.global_after.raw()});
  file.entries.push_back({rounds, static_cast<std::int32_t>(target_client),
                          EntryRole::kTargetLocal, outcome.target_local_after.raw()});
  return file;
}

UnlearnOutcome outcome_from_file(const ParamFile& file) {
  if (file.kind != ParamFileKind::kUnlearnOutcome)
    throw FormatError("not an unlearning outcome file");
  std::vector<std::size_t> dims(file.layer_dims.begin(), file.layer_dims.end());
  LayoutPtr layout;
  try {
    layout = LayerLayout::make(dims);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad layer dims: ") + e.what());
  }
  UnlearnOutcome out;
  bool have_global = false;
  bool have_local = false;
  for (const auto& e : file.entries) {
    if (e.values.size() != layout->total())
      throw FormatError("entry length does not match layer layout");
    if (e.role == EntryRole::kUnlearnGlobal) {
      out.global_after = ParamVector(layout, e.values);
      out.rounds_used = e.round;
      have_global = true;
    } else if (e.role == EntryRole::kTargetLocal) {
      out.target_local_after = ParamVector(layout, e.values);
      have_local = true;
    } else {
      throw FormatError("unexpected entry role in outcome file");
    }
  }
  if (!have_global || !have_local) throw FormatError("outcome file incomplete");
  return out;
}

}  // namespace ulsim
