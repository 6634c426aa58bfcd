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

#ifndef ULSIM_JSON_WRITER_HPP_
#define ULSIM_JSON_WRITER_HPP_

// Minimal streaming JSON emitter for canonical output: keys appear in the
// order written and doubles use 17 significant digits.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ulsim {

std::string format_double(double v);  // "%.17g"; non-finite -> null

class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

  JsonWriter& array(std::span<const double> v);
  JsonWriter& array(std::span<const int> v);

  const std::string& str() const { return out_; }

 private:
  void separator();
  void write_string(std::string_view v);

  std::string out_;
  std::vector<bool> first_;  // per open container: nothing written yet
  bool after_key_ = false;
};

}  // namespace ulsim

#endif  // ULSIM_JSON_WRITER_HPP_
