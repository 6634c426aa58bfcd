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

#ifndef ULSIM_DATA_HPP_
#define ULSIM_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ulsim/model.hpp"
#include "ulsim/rng.hpp"

namespace ulsim {

struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols; }
};

// Client i holds sample indices clients[i], kept sorted ascending.
struct Partition {
  std::vector<std::vector<std::size_t>> clients;

  std::size_t num_clients() const { return clients.size(); }
  std::size_t total() const;
  // Disjoint, within [0, dataset_size), and (if require_cover) covering it.
  void validate(std::size_t dataset_size, bool require_cover) const;

  bool operator==(const Partition&) const = default;
};

enum class UnlearnLevel { kSample, kClass, kClient };

const char* to_string(UnlearnLevel level);
UnlearnLevel parse_level(const std::string& name);

struct UnlearningRequest {
  UnlearnLevel level = UnlearnLevel::kSample;
  std::size_t target_client = 0;
  std::vector<std::size_t> sample_ids;  // sample level
  std::vector<int> classes;             // class level
};

struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t samples_per_class = 300;
  std::size_t feature_dim = 20;
  double spread = 1.0;

  bool operator==(const SyntheticSpec&) const = default;
};

// One isotropic Gaussian blob per class; class means ~ N(0, I).
Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

Batch gather(const Dataset& data, std::span<const std::size_t> indices);
Batch full_batch(const Dataset& data);

Partition partition_iid(std::size_t num_samples, std::size_t num_clients,
                        std::uint64_t seed);
Partition partition_dirichlet(const Dataset& data, std::size_t num_clients,
                              double alpha, std::uint64_t seed);

Partition apply_request(const Partition& partition, const Dataset& data,
                        const UnlearningRequest& request);

// Samples removed by the request, in ascending order.
std::vector<std::size_t> forgotten_samples(const Partition& partition,
                                           const Dataset& data,
                                           const UnlearningRequest& request);

// Picks round(fraction * |D_K|) samples of K, split evenly over `classes`
// (at least one per class, capped by what K holds of that class).
std::vector<std::size_t> select_forgotten_samples(const Partition& partition,
                                                  const Dataset& data,
                                                  std::size_t target,
                                                  std::span<const int> classes,
                                                  double fraction, Rng& rng);

// Rebuilds the partition so `target` holds only samples of `classes`,
// keeping every client's size. Samples are swapped with the other clients.
Partition assign_target_classes(const Partition& partition, const Dataset& data,
                                std::size_t target, std::span<const int> classes,
                                Rng& rng);

// Sorted distinct labels present in a client's data.
std::vector<int> client_labels(const Partition& partition, const Dataset& data,
                               std::size_t client);

// MNIST-style IDX pair: images magic 0x00000803, labels magic 0x00000801.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

void write_csv(const Dataset& data, const std::string& path);

}  // namespace ulsim

#endif  // ULSIM_DATA_HPP_
