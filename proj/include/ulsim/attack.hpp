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

#ifndef ULSIM_ATTACK_HPP_
#define ULSIM_ATTACK_HPP_

// Label inference against federated unlearning.
//
// The server holds the target client's local model and the global model from
// before and after an unlearning request. The pipeline:
//   1. parameter deltas        delta = after - before (local and global)
//   2. learning-rate estimate  mean over past rounds of
//                              |local_K - global_before| / |global_after - global_before|
//   3. gradient difference     (delta_global - delta_local) / ((1 - w_K) * eta)
//   4. label mapping           per-class mean |gradient difference| over the
//                              class's output-layer row and bias, z-scored
//                              across classes, then thresholded or top-k.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ulsim/federation.hpp"
#include "ulsim/model.hpp"

namespace ulsim {

struct AttackMode {
  enum class Kind { kKnownCount, kThreshold };

  Kind kind = Kind::kThreshold;
  std::size_t k = 1;
  double tau = 2.0;

  static AttackMode known_count(std::size_t k) { return {Kind::kKnownCount, k, 2.0}; }
  static AttackMode threshold(double tau = 2.0) { return {Kind::kThreshold, 1, tau}; }

  void validate(std::size_t num_classes) const;
  bool operator==(const AttackMode&) const = default;
};

const char* to_string(AttackMode::Kind kind);
AttackMode::Kind parse_mode_kind(const std::string& name);

struct AttackInput {
  ParamVector local_before;   // target's local model at the unlearning round
  ParamVector local_after;    // target's local model after unlearning
  ParamVector global_before;
  ParamVector global_after;
  const FederationHistory* history = nullptr;
  std::size_t target_client = 0;
  double w_k = 0.0;           // target weight in pre-unlearning aggregation
};

enum class AttackStatus { kOk, kSingularity, kDegenerateHistory };

const char* to_string(AttackStatus status);

struct AttackReport {
  AttackStatus status = AttackStatus::kOk;
  std::string error;
  AttackMode mode;
  std::size_t window = 0;
  std::size_t target_client = 0;
  double w_k = 0.0;
  double eta_approx = 0.0;
  ParamVector delta_local;
  ParamVector delta_global;
  ParamVector grad_diff;
  std::vector<double> agd;
  std::vector<double> zscores;
  std::vector<int> candidates;  // ascending

  bool ok() const { return status == AttackStatus::kOk; }
};

// Post-minus-pre for the local and the global model.
std::pair<ParamVector, ParamVector> param_deltas(const AttackInput& input);

// Mean norm ratio over the last `window` rounds (0: all rounds). Rounds whose
// global step is below 1e-12 are skipped.
double estimate_learning_rate(const FederationHistory& history, std::size_t target_client,
                              std::size_t window = 0);

ParamVector derive_grad_diff(const ParamVector& delta_local, const ParamVector& delta_global,
                             double w_k, double eta_approx);

std::vector<double> per_class_agd(const ParamVector& grad_diff);

// Population z-scores; all zero when the spread is below 1e-15.
std::vector<double> zscores(const std::vector<double>& agd);

// Threshold: every class with z > tau. Known count: the k largest z, lower
// class id first on ties.
std::vector<int> select_candidates(const std::vector<double>& z, const AttackMode& mode);

// Runs all four steps. Singular weights and degenerate histories are reported
// through `status`; other precondition failures throw.
AttackReport run_attack(const AttackInput& input, const AttackMode& mode,
                        std::size_t window = 0);

// Canonical JSON: fixed key order, 17 significant digits, no timestamps.
std::string to_json(const AttackReport& report);

}  // namespace ulsim

#endif  // ULSIM_ATTACK_HPP_
