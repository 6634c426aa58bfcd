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

#ifndef ULSIM_PARAM_IO_HPP_
#define ULSIM_PARAM_IO_HPP_

// Binary parameter dump shared by training histories and unlearning
// outcomes. Layout is documented in docs/param_file_format.md.

#include <cstdint>
#include <string>
#include <vector>

#include "ulsim/federation.hpp"

namespace ulsim {

enum class ParamFileKind : std::uint32_t { kHistory = 0, kUnlearnOutcome = 1 };

enum class EntryRole : std::uint32_t {
  kInitial = 0,
  kGlobalBefore = 1,
  kLocal = 2,
  kGlobalAfter = 3,
  kWeights = 4,
  kFinalGlobal = 5,
  kUnlearnGlobal = 6,
  kTargetLocal = 7,
};

struct ParamEntry {
  std::uint32_t round = 0;
  std::int32_t client = -1;  // -1: not client specific
  EntryRole role = EntryRole::kInitial;
  std::vector<double> values;
};

struct ParamFile {
  ParamFileKind kind = ParamFileKind::kHistory;
  std::string metadata;  // canonical JSON text
  std::vector<std::uint64_t> layer_dims;
  std::vector<ParamEntry> entries;
};

inline constexpr char kParamFileMagic[8] = {'U', 'L', 'S', 'I', 'M', 'P', 'R', 'M'};
inline constexpr std::uint32_t kParamFileVersion = 1;

std::vector<unsigned char> encode_param_file(const ParamFile& file);
ParamFile decode_param_file(const std::vector<unsigned char>& bytes);

void write_param_file(const std::string& path, const ParamFile& file);
ParamFile read_param_file(const std::string& path);

ParamFile history_to_file(const FederationHistory& history, std::string metadata);
FederationHistory history_from_file(const ParamFile& file);

}  // namespace ulsim

#endif  // ULSIM_PARAM_IO_HPP_
