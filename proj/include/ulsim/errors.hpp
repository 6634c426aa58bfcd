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

#ifndef ULSIM_ERRORS_HPP_
#define ULSIM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ulsim {

// Inconsistent dimensions, layouts or configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied data violates an operation's precondition.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Attack-pipeline failures that are reported, not propagated, by run_attack.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateHistoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ulsim

#endif  // ULSIM_ERRORS_HPP_
