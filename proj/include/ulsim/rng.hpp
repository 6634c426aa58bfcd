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

#ifndef ULSIM_RNG_HPP_
#define ULSIM_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ulsim {

using Rng = std::mt19937_64;

// Independent stream per tuple of tags, e.g. {seed, round, client}.
inline Rng make_rng(std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.reserve(tags.size() * 2);
  for (std::uint64_t t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Stream tags, so that e.g. partitioning and initialisation never share draws.
namespace stream {
inline constexpr std::uint64_t kData = 0xda7a;
inline constexpr std::uint64_t kPartition = 0x9a27;
inline constexpr std::uint64_t kBatchOrder = 0xba7c;
inline constexpr std::uint64_t kFineTune = 0xf17e;
inline constexpr std::uint64_t kFisher = 0xf15e;
inline constexpr std::uint64_t kScenario = 0x5ce7;
}  // namespace stream

}  // namespace ulsim

#endif  // ULSIM_RNG_HPP_
