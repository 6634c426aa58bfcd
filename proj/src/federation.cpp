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

#include "ulsim/federation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "ulsim/errors.hpp"
#include "ulsim/kernels.hpp"

namespace ulsim {

void FLConfig::validate() const {
  if (num_clients == 0) throw ConfigError("federation.num_clients must be positive");
  if (local_epochs == 0) throw ConfigError("federation.local_epochs must be positive");
  if (batch_size == 0) throw ConfigError("federation.batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("federation.learning_rate must be positive");
}

LayoutPtr make_layout(const Dataset& data, std::span<const std::size_t> hidden) {
  std::vector<std::size_t> dims{data.feature_dim()};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(data.num_classes);
  return LayerLayout::make(std::move(dims));
}

std::vector<double> client_weights(const Partition& partition) {
  const auto total = static_cast<double>(partition.total());
  if (total == 0.0) throw InputError("all clients are empty");
  std::vector<double> w;
  w.reserve(partition.num_clients());
  for (const auto& c : partition.clients) w.push_back(static_cast<double>(c.size()) / total);
  return w;
}

Rng batch_rng(std::uint64_t seed, std::uint64_t tag, std::size_t round,
              std::size_t client) {
  return make_rng({seed, tag, round, client});
}

ParamVector local_update(const ParamVector& global, const Dataset& data,
                         std::span<const std::size_t> indices, const FLConfig& config,
                         Rng& rng) {
  if (indices.empty()) throw InputError("local update on empty client data");
  ParamVector params = global;
  if (config.learning_rate == 0.0) return params;
  std::vector<std::size_t> order(indices.begin(), indices.end());
  for (std::size_t epoch = 0; epoch < config.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const Batch batch =
          gather(data, std::span<const std::size_t>(order).subspan(start, end - start));
      const LossAndGrad lg = loss_and_grad(params, batch);
      kernels::parallel::axpy(-config.learning_rate, lg.grad.values(), params.values());
    }
  }
  return params;
}

ParamVector aggregate(std::span<const ParamVector> locals,
                      std::span<const double> weights) {
  if (locals.empty()) throw InputError("nothing to aggregate");
  if (locals.size() != weights.size()) throw ConfigError("weights/locals count mismatch");
  std::vector<std::span<const double>> views;
  views.reserve(locals.size());
  for (const auto& l : locals) {
    require_same_layout(locals.front(), l);
    views.push_back(l.values());
  }
  ParamVector out(locals.front().layout_ptr());
  kernels::parallel::weighted_sum(views, weights, out.values());
  return out;
}

FederationHistory run_fl(const Dataset& data, const Partition& partition,
                         const FLConfig& config, const ParamVector& initial,
                         std::uint64_t tag) {
  config.validate();
  if (partition.num_clients() == 0) throw InputError("partition has no clients");
  partition.validate(data.size(), false);
  const std::vector<double> weights = client_weights(partition);

  FederationHistory history;
  history.initial = initial;
  ParamVector global = initial;
  const auto n = static_cast<std::int64_t>(partition.num_clients());
  for (std::size_t r = 0; r < config.rounds; ++r) {
    RoundRecord rec;
    rec.round = r;
    rec.global_before = global;
    rec.weights = weights;
    rec.locals.assign(partition.num_clients(), global);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& held = partition.clients[i];
      if (held.empty()) continue;
      Rng rng = batch_rng(config.seed, tag, r, static_cast<std::size_t>(i));
      rec.locals[i] = local_update(global, data, held, config, rng);
    }
    rec.global_after = aggregate(rec.locals, rec.weights);
    global = rec.global_after;
    history.rounds.push_back(std::move(rec));
  }
  return history;
}

FederationHistory run_fl(const Dataset& data, const Partition& partition,
                         const FLConfig& config, std::span<const std::size_t> hidden) {
  const LayoutPtr layout = make_layout(data, hidden);
  return run_fl(data, partition, config, init_params(layout, config.seed));
}

double accuracy(const ParamVector& params, const Dataset& data,
                std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  const Batch b = gather(data, indices);
  const std::vector<int> pred = predict(params, b.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == b.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace ulsim
