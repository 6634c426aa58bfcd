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

#ifndef ULSIM_UNLEARNING_HPP_
#define ULSIM_UNLEARNING_HPP_

// Federated unlearning strategies. Each produces the post-unlearning global
// model and the requesting client's post-unlearning local model.

#include <cstddef>
#include <string>

#include "ulsim/data.hpp"
#include "ulsim/federation.hpp"
#include "ulsim/param_io.hpp"

namespace ulsim {

enum class UnlearnMethod { kFedEraser, kRetrain, kSgaEwc };

const char* to_string(UnlearnMethod method);
UnlearnMethod parse_method(const std::string& name);

struct UnlearnParams {
  std::size_t calib_epochs = 1;
  std::size_t ascent_steps = 20;
  double lambda_ewc = 1.0;
  std::size_t fine_tune_rounds = 5;
  std::size_t fisher_samples = 1024;

  void validate(const FLConfig& config) const;
  bool operator==(const UnlearnParams&) const = default;
};

struct UnlearnOutcome {
  ParamVector global_after;
  ParamVector target_local_after;
  Partition retained_partition;
  UnlearnMethod method = UnlearnMethod::kRetrain;
  std::size_t rounds_used = 0;
};

// The requesting client's local model after unlearning.
//
// Sample/class level: the client's last-round local update is re-run from the
// same base global (and batch-order stream) on its retained data. Client level,
// or a client left without data: the post-unlearning global.
ParamVector post_unlearning_local(const FederationHistory& history, const Dataset& data,
                                  const Partition& retained,
                                  const UnlearningRequest& request,
                                  const FLConfig& config, const ParamVector& global_after);

// Replays the recorded rounds on retained data: each retained client's update
// keeps the norm of its stored historical update but takes the direction of a
// fresh calibration update from the reconstructed global.
UnlearnOutcome unlearn_federaser(const FederationHistory& history, const Dataset& data,
                                 const Partition& partition,
                                 const UnlearningRequest& request, const FLConfig& config,
                                 const UnlearnParams& params = {});

// Retrains on retained data for config.rounds from the history's initial model.
UnlearnOutcome unlearn_retrain(const FederationHistory& history, const Dataset& data,
                               const Partition& partition,
                               const UnlearningRequest& request, const FLConfig& config);

// Gradient ascent on the forgotten samples with an EWC penalty anchored at the
// trained model, followed by FedAvg fine-tuning on retained data.
UnlearnOutcome unlearn_sga_ewc(const FederationHistory& history, const Dataset& data,
                               const Partition& partition,
                               const UnlearningRequest& request, const FLConfig& config,
                               const UnlearnParams& params = {});

UnlearnOutcome unlearn(UnlearnMethod method, const FederationHistory& history,
                       const Dataset& data, const Partition& partition,
                       const UnlearningRequest& request, const FLConfig& config,
                       const UnlearnParams& params = {});

// Diagonal Fisher: mean squared per-sample gradient over the given samples.
ParamVector diagonal_fisher(const ParamVector& params, const Dataset& data,
                            std::span<const std::size_t> indices);

ParamFile outcome_to_file(const UnlearnOutcome& outcome, std::size_t target_client,
                          std::string metadata);
// Restores the two parameter vectors; the partition is not stored.
UnlearnOutcome outcome_from_file(const ParamFile& file);

}  // namespace ulsim

#endif  // ULSIM_UNLEARNING_HPP_
