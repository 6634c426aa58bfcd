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

#ifndef ULSIM_CONFIG_HPP_
#define ULSIM_CONFIG_HPP_

// Run configuration: one JSON document binding dataset, federation,
// unlearning, attack and experiment settings. Keys are documented in
// docs/config.md; unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ulsim/eval.hpp"

namespace ulsim {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t workers = 0;

  std::string dataset_source = "synthetic";  // "synthetic" | "idx"
  SyntheticSpec synthetic;
  std::string idx_images;
  std::string idx_labels;
  std::size_t idx_max_samples = 0;  // 0: all

  std::vector<std::size_t> hidden{32};

  FLConfig fl;
  Distribution distribution = Distribution::kIid;
  double dirichlet_alpha = 0.5;

  UnlearnMethod method = UnlearnMethod::kRetrain;
  UnlearnLevel level = UnlearnLevel::kClass;
  std::size_t num_labels = 1;
  double forgotten_fraction = 0.10;
  UnlearnParams unlearn;

  AttackMode::Kind mode = AttackMode::Kind::kThreshold;
  double tau = 2.0;
  std::size_t window = 0;

  std::size_t trials = 30;
  bool has_axes = false;  // false: the single point above
  SweepAxes axes;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
// Canonical JSON with every key present.
std::string config_to_json(const RunConfig& config);

// Named preset from the preset directory, or a path to a config file.
RunConfig load_preset(const std::string& name_or_path);
std::vector<std::string> preset_names();

GridPoint single_point(const RunConfig& config);
SweepAxes effective_axes(const RunConfig& config);
ExperimentSetup make_setup(const RunConfig& config);

}  // namespace ulsim

#endif  // ULSIM_CONFIG_HPP_
