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

#ifndef ULSIM_EVAL_HPP_
#define ULSIM_EVAL_HPP_

// Attack success scoring, multi-trial experiments and parameter sweeps.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ulsim/attack.hpp"
#include "ulsim/data.hpp"
#include "ulsim/federation.hpp"
#include "ulsim/unlearning.hpp"

namespace ulsim {

enum class Distribution { kIid, kDirichlet };

const char* to_string(Distribution d);
Distribution parse_distribution(const std::string& name);

// Everything about a trial that is not a sweep axis.
struct ExperimentSetup {
  SyntheticSpec synthetic;
  // When set, every trial uses this dataset instead of a synthetic one.
  std::shared_ptr<const Dataset> fixed_dataset;
  std::vector<std::size_t> hidden{32};
  FLConfig fl;
  UnlearnParams unlearn;
  std::size_t window = 0;
  double dirichlet_alpha = 0.5;
};

struct GridPoint {
  UnlearnMethod method = UnlearnMethod::kRetrain;
  UnlearnLevel level = UnlearnLevel::kClass;
  std::size_t num_labels = 1;
  double forgotten_fraction = 0.10;
  Distribution distribution = Distribution::kIid;
  AttackMode::Kind mode = AttackMode::Kind::kThreshold;
  double tau = 2.0;

  bool operator==(const GridPoint&) const = default;
};

struct SweepAxes {
  std::vector<UnlearnMethod> methods;
  std::vector<UnlearnLevel> levels;
  std::vector<std::size_t> num_labels;
  std::vector<double> fractions;
  std::vector<Distribution> distributions;
  std::vector<AttackMode::Kind> modes;
  std::vector<double> taus;

  void validate() const;
  // Cartesian product in the field order above, last axis fastest.
  std::vector<GridPoint> points() const;

  bool operator==(const SweepAxes&) const = default;
};

// Concrete inputs of one trial before training.
struct Scenario {
  std::shared_ptr<const Dataset> data;
  Partition partition;
  UnlearningRequest request;
  std::vector<int> true_labels;
  FLConfig fl;
};

// Dataset, partition, target client and request for a trial seed. The target
// is drawn uniformly (sample level: among clients holding >= L classes);
// client level rebuilds the target's data to hold exactly L classes.
Scenario prepare_scenario(const ExperimentSetup& setup, const GridPoint& point,
                          std::uint64_t seed);

// Attack inputs for a trained history and an unlearning outcome.
AttackInput make_attack_input(const FederationHistory& history, const UnlearnOutcome& outcome,
                              const UnlearningRequest& request);

AttackMode attack_mode_for(const GridPoint& point, std::size_t true_count);

// |A ∩ B| / |A ∪ B|; `truth` must be non-empty.
double iou_asr(std::span<const int> truth, std::span<const int> predicted);

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t target_client = 0;
  std::vector<int> true_labels;
  std::vector<int> predicted_labels;
  double asr = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentResult {
  GridPoint point;
  std::vector<TrialResult> trials;
  double mean_asr = 0.0;
  double std_asr = 0.0;  // population
  std::size_t failures = 0;
};

void summarize(ExperimentResult& result);

// Trial i uses seed base_seed + i. workers == 0: OpenMP default.
ExperimentResult run_trials(const ExperimentSetup& setup, const GridPoint& point,
                            std::size_t trials, std::uint64_t base_seed,
                            std::size_t workers = 0);

// Points that differ only in method, mode or tau share one trained history per
// trial; results come back in axes.points() order.
std::vector<ExperimentResult> sweep(const ExperimentSetup& setup, const SweepAxes& axes,
                                    std::size_t trials, std::uint64_t base_seed,
                                    std::size_t workers = 0);

inline constexpr const char* kResultsCsvHeader =
    "method,level,num_label_categories,forgotten_fraction,tau,distribution,mode,trials,"
    "mean_asr,std_asr,failures";

std::string results_csv(const std::vector<ExperimentResult>& results);
std::string trials_jsonl(const std::vector<ExperimentResult>& results);
std::string results_table(const std::vector<ExperimentResult>& results);

// Accuracy of the trained and unlearned models on forgotten and retained
// classes for a class-level request.
struct EfficacyResult {
  double forgotten_before = 0.0;
  double forgotten_after = 0.0;
  double retained_before = 0.0;
  double retained_after = 0.0;
};

EfficacyResult evaluate_class_unlearning(const ExperimentSetup& setup, UnlearnMethod method,
                                         std::size_t num_labels, std::uint64_t seed);

}  // namespace ulsim

#endif  // ULSIM_EVAL_HPP_
