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

#ifndef ULSIM_FEDERATION_HPP_
#define ULSIM_FEDERATION_HPP_

// FedAvg simulation with full per-round parameter history.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ulsim/data.hpp"
#include "ulsim/model.hpp"
#include "ulsim/rng.hpp"

namespace ulsim {

struct FLConfig {
  std::size_t num_clients = 10;
  std::size_t rounds = 30;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const FLConfig&) const = default;
};

struct RoundRecord {
  std::size_t round = 0;
  ParamVector global_before;
  // Clients without data keep global_before here and have weight 0.
  std::vector<ParamVector> locals;
  ParamVector global_after;
  std::vector<double> weights;
};

struct FederationHistory {
  ParamVector initial;
  std::vector<RoundRecord> rounds;

  const ParamVector& final_global() const {
    return rounds.empty() ? initial : rounds.back().global_after;
  }
  std::size_t num_clients() const {
    return rounds.empty() ? 0 : rounds.front().locals.size();
  }
};

LayoutPtr make_layout(const Dataset& data, std::span<const std::size_t> hidden);

// w_i = |D_i| / sum_j |D_j|; empty clients get 0.
std::vector<double> client_weights(const Partition& partition);

// Batch-order stream for (seed, round, client); `tag` separates training
// from fine-tuning runs that reuse round numbers.
Rng batch_rng(std::uint64_t seed, std::uint64_t tag, std::size_t round,
              std::size_t client);

// E epochs of mini-batch SGD from `global` over the given samples.
ParamVector local_update(const ParamVector& global, const Dataset& data,
                         std::span<const std::size_t> indices, const FLConfig& config,
                         Rng& rng);

ParamVector aggregate(std::span<const ParamVector> locals,
                      std::span<const double> weights);

FederationHistory run_fl(const Dataset& data, const Partition& partition,
                         const FLConfig& config, const ParamVector& initial,
                         std::uint64_t tag = stream::kBatchOrder);

// Starts from init_params(layout, config.seed).
FederationHistory run_fl(const Dataset& data, const Partition& partition,
                         const FLConfig& config, std::span<const std::size_t> hidden);

double accuracy(const ParamVector& params, const Dataset& data,
                std::span<const std::size_t> indices);

}  // namespace ulsim

#endif  // ULSIM_FEDERATION_HPP_
