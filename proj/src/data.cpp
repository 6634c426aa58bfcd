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

#include "ulsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>

#include "ulsim/errors.hpp"

namespace ulsim {

std::size_t Partition::total() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.size();
  return n;
}

void Partition::validate(std::size_t dataset_size, bool require_cover) const {
  std::vector<char> seen(dataset_size, 0);
  for (const auto& client : clients) {
    for (std::size_t i : client) {
      if (i >= dataset_size) throw InputError("partition index out of range");
      if (seen[i]) throw InputError("sample held by two clients");
      seen[i] = 1;
    }
  }
  if (require_cover && total() != dataset_size)
    throw InputError("partition does not cover the dataset");
}

const char* to_string(UnlearnLevel level) {
  switch (level) {
    case UnlearnLevel::kSample: return "sample";
    case UnlearnLevel::kClass: return "class";
    case UnlearnLevel::kClient: return "client";
  }
  return "?";
}

UnlearnLevel parse_level(const std::string& name) {
  if (name == "sample") return UnlearnLevel::kSample;
  if (name == "class") return UnlearnLevel::kClass;
  if (name == "client") return UnlearnLevel::kClient;
  throw ConfigError("unknown unlearning level '" + name + "'");
}

Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw InputError("num_classes must be >= 2");
  if (spec.samples_per_class < 1) throw InputError("samples_per_class must be >= 1");
  if (spec.feature_dim < 1) throw InputError("feature_dim must be >= 1");
  if (!(spec.spread >= 0.0)) throw InputError("spread must be non-negative");

  Rng rng = make_rng({seed, stream::kData});
  std::normal_distribution<double> unit(0.0, 1.0);
  Matrix means(spec.num_classes, spec.feature_dim);
  for (double& m : means.data) m = unit(rng);

  Dataset out;
  out.num_classes = spec.num_classes;
  out.features = Matrix(spec.num_classes * spec.samples_per_class, spec.feature_dim);
  out.labels.reserve(out.features.rows);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
      auto x = out.features.row(row);
      for (std::size_t k = 0; k < spec.feature_dim; ++k)
        x[k] = means(c, k) + spec.spread * unit(rng);
      out.labels.push_back(static_cast<int>(c));
    }
  }
  return out;
}

Batch gather(const Dataset& data, std::span<const std::size_t> indices) {
  Batch b;
  b.inputs = Matrix(indices.size(), data.feature_dim());
  b.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = data.features.row(indices[r]);
    std::copy(src.begin(), src.end(), b.inputs.row(r).begin());
    b.labels.push_back(data.labels[indices[r]]);
  }
  return b;
}

Batch full_batch(const Dataset& data) { return {data.features, data.labels}; }

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

void sort_clients(Partition& p) {
  for (auto& c : p.clients) std::sort(c.begin(), c.end());
}

}  // namespace

Partition partition_iid(std::size_t num_samples, std::size_t num_clients,
                        std::uint64_t seed) {
  if (num_clients == 0) throw InputError("need at least one client");
  if (num_clients > num_samples)
    throw InputError("more clients (" + std::to_string(num_clients) + ") than samples (" +
                     std::to_string(num_samples) + ")");
  Rng rng = make_rng({seed, stream::kPartition});
  auto idx = iota_indices(num_samples);
  std::shuffle(idx.begin(), idx.end(), rng);

  Partition p;
  p.clients.resize(num_clients);
  const std::size_t base = num_samples / num_clients;
  const std::size_t extra = num_samples % num_clients;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < num_clients; ++i) {
    const std::size_t n = base + (i < extra ? 1 : 0);
    p.clients[i].assign(idx.begin() + pos, idx.begin() + pos + n);
    pos += n;
  }
  sort_clients(p);
  return p;
}

Partition partition_dirichlet(const Dataset& data, std::size_t num_clients,
                              double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InputError("dirichlet alpha must be positive");
  if (num_clients == 0) throw InputError("need at least one client");
  if (num_clients > data.size()) throw InputError("more clients than samples");

  Rng rng = make_rng({seed, stream::kPartition});
  std::vector<std::vector<std::size_t>> by_class(data.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i)
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

  std::gamma_distribution<double> gamma(alpha, 1.0);
  constexpr int kMaxAttempts = 100;
  Partition p;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    p.clients.assign(num_clients, {});
    for (auto& members : by_class) {
      std::vector<std::size_t> shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::vector<double> props(num_clients);
      double sum = 0.0;
      for (double& x : props) sum += (x = gamma(rng));
      if (!(sum > 0.0)) {
        std::fill(props.begin(), props.end(), 1.0);
        sum = static_cast<double>(num_clients);
      }
      // Split points at the cumulative proportions.
      double cum = 0.0;
      std::size_t start = 0;
      for (std::size_t i = 0; i < num_clients; ++i) {
        cum += props[i] / sum;
        std::size_t end = i + 1 == num_clients
                              ? shuffled.size()
                              : std::min(shuffled.size(),
                                         static_cast<std::size_t>(cum * shuffled.size()));
        end = std::max(end, start);
        p.clients[i].insert(p.clients[i].end(), shuffled.begin() + start,
                            shuffled.begin() + end);
        start = end;
      }
    }
    if (std::none_of(p.clients.begin(), p.clients.end(),
                     [](const auto& c) { return c.empty(); }))
      break;
  }
  // Rebalance any client still empty with one sample from the largest client.
  for (auto& client : p.clients) {
    if (!client.empty()) continue;
    auto largest = std::max_element(p.clients.begin(), p.clients.end(),
                                    [](const auto& a, const auto& b) {
                                      return a.size() < b.size();
                                    });
    client.push_back(largest->back());
    largest->pop_back();
  }
  sort_clients(p);
  return p;
}

namespace {

void validate_request(const Partition& partition, const Dataset& data,
                      const UnlearningRequest& request) {
  if (request.target_client >= partition.num_clients())
    throw InputError("target client out of range");
  const auto& held = partition.clients[request.target_client];
  switch (request.level) {
    case UnlearnLevel::kSample:
      if (request.sample_ids.empty()) throw InputError("sample-level request without samples");
      for (std::size_t id : request.sample_ids)
        if (!std::binary_search(held.begin(), held.end(), id))
          throw InputError("sample " + std::to_string(id) + " is not held by client " +
                           std::to_string(request.target_client));
      break;
    case UnlearnLevel::kClass:
      if (request.classes.empty()) throw InputError("class-level request without classes");
      for (int c : request.classes)
        if (c < 0 || static_cast<std::size_t>(c) >= data.num_classes)
          throw InputError("class " + std::to_string(c) + " out of range");
      break;
    case UnlearnLevel::kClient:
      break;
  }
}

}  // namespace

Partition apply_request(const Partition& partition, const Dataset& data,
                        const UnlearningRequest& request) {
  validate_request(partition, data, request);
  Partition out = partition;
  auto& target = out.clients[request.target_client];
  switch (request.level) {
    case UnlearnLevel::kSample: {
      std::set<std::size_t> drop(request.sample_ids.begin(), request.sample_ids.end());
      std::erase_if(target, [&](std::size_t i) { return drop.contains(i); });
      if (target.empty())
        throw InputError("sample-level request would remove all of the client's data");
      break;
    }
    case UnlearnLevel::kClass: {
      std::set<int> drop(request.classes.begin(), request.classes.end());
      for (auto& client : out.clients)
        std::erase_if(client, [&](std::size_t i) { return drop.contains(data.labels[i]); });
      if (out.total() == 0)
        throw InputError("class-level request would leave no data on any client");
      break;
    }
    case UnlearnLevel::kClient:
      target.clear();
      if (out.total() == 0) throw InputError("client-level request removes all data");
      break;
  }
  return out;
}

std::vector<std::size_t> forgotten_samples(const Partition& partition,
                                           const Dataset& data,
                                           const UnlearningRequest& request) {
  const Partition kept = apply_request(partition, data, request);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < partition.num_clients(); ++i)
    std::set_difference(partition.clients[i].begin(), partition.clients[i].end(),
                        kept.clients[i].begin(), kept.clients[i].end(),
                        std::back_inserter(out));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> select_forgotten_samples(const Partition& partition,
                                                  const Dataset& data,
                                                  std::size_t target,
                                                  std::span<const int> classes,
                                                  double fraction, Rng& rng) {
  if (target >= partition.num_clients()) throw InputError("target client out of range");
  if (classes.empty()) throw InputError("no label categories requested");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("forgotten fraction must be in (0, 1)");
  const auto& held = partition.clients[target];
  const auto total = static_cast<std::size_t>(std::llround(fraction * held.size()));
  const std::size_t per = total / classes.size();
  const std::size_t extra = total % classes.size();

  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i : held)
      if (data.labels[i] == classes[c]) members.push_back(i);
    if (members.empty())
      throw InputError("client " + std::to_string(target) + " holds no samples of class " +
                       std::to_string(classes[c]));
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t want = std::max<std::size_t>(1, per + (c < extra ? 1 : 0));
    const std::size_t take = std::min(want, members.size());
    out.insert(out.end(), members.begin(), members.begin() + take);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Partition assign_target_classes(const Partition& partition, const Dataset& data,
                                std::size_t target, std::span<const int> classes,
                                Rng& rng) {
  if (target >= partition.num_clients()) throw InputError("target client out of range");
  std::set<int> wanted(classes.begin(), classes.end());
  const std::size_t size = partition.clients[target].size();

  std::vector<std::size_t> pool;
  for (const auto& client : partition.clients)
    for (std::size_t i : client)
      if (wanted.contains(data.labels[i])) pool.push_back(i);
  std::sort(pool.begin(), pool.end());
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(pool.size(), size));
  std::set<std::size_t> taken(pool.begin(), pool.end());

  std::vector<std::size_t> released;
  for (std::size_t i : partition.clients[target])
    if (!taken.contains(i)) released.push_back(i);
  std::shuffle(released.begin(), released.end(), rng);

  Partition out;
  out.clients.resize(partition.num_clients());
  out.clients[target] = pool;
  std::size_t next = 0;
  for (std::size_t c = 0; c < partition.num_clients(); ++c) {
    if (c == target) continue;
    for (std::size_t i : partition.clients[c]) {
      if (!taken.contains(i)) {
        out.clients[c].push_back(i);
      } else if (next < released.size()) {
        out.clients[c].push_back(released[next++]);
      }
    }
  }
  // Only reachable when the wanted classes hold fewer samples than the target.
  for (std::size_t c = 0; next < released.size(); c = (c + 1) % out.num_clients())
    if (c != target) out.clients[c].push_back(released[next++]);
  sort_clients(out);
  return out;
}

std::vector<int> client_labels(const Partition& partition, const Dataset& data,
                               std::size_t client) {
  std::set<int> labels;
  for (std::size_t i : partition.clients.at(client)) labels.insert(data.labels[i]);
  return {labels.begin(), labels.end()};
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& buf, std::size_t pos) {
  return (std::uint32_t{buf[pos]} << 24) | (std::uint32_t{buf[pos + 1]} << 16) |
         (std::uint32_t{buf[pos + 2]} << 8) | std::uint32_t{buf[pos + 3]};
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  if (images.size() < 16) throw FormatError(images_path + ": truncated IDX header");
  if (labels.size() < 8) throw FormatError(labels_path + ": truncated IDX header");
  if (be32(images, 0) != 0x00000803) throw FormatError(images_path + ": bad IDX image magic");
  if (be32(labels, 0) != 0x00000801) throw FormatError(labels_path + ": bad IDX label magic");

  const std::size_t count = be32(images, 4);
  const std::size_t rows = be32(images, 8);
  const std::size_t cols = be32(images, 12);
  const std::size_t label_count = be32(labels, 4);
  if (count != label_count)
    throw FormatError("image count " + std::to_string(count) + " != label count " +
                      std::to_string(label_count));
  const std::size_t dim = rows * cols;
  if (dim == 0) throw FormatError(images_path + ": zero-sized images");
  if (images.size() < 16 + count * dim) throw FormatError(images_path + ": truncated pixel data");
  if (labels.size() < 8 + count) throw FormatError(labels_path + ": truncated label data");

  Dataset out;
  out.num_classes = 10;
  out.features = Matrix(count, dim);
  for (std::size_t i = 0; i < count * dim; ++i)
    out.features.data[i] = static_cast<double>(images[16 + i]) / 255.0;
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int y = labels[8 + i];
    if (y > 9) throw FormatError(labels_path + ": label " + std::to_string(y) + " > 9");
    out.labels[i] = y;
  }
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot write " + path);
  for (std::size_t k = 0; k < data.feature_dim(); ++k) std::fprintf(f, "f%zu,", k);
  std::fprintf(f, "label\n");
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (double x : data.features.row(s)) std::fprintf(f, "%.17g,", x);
    std::fprintf(f, "%d\n", data.labels[s]);
  }
  std::fclose(f);
}

}  // namespace ulsim
