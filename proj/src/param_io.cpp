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

#include "ulsim/param_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ulsim/errors.hpp"

namespace ulsim {
namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    out.insert(out.end(), c, c + n);
  }
  std::vector<unsigned char> out;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& b) : buf(b) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  void need(std::size_t n) const {
    if (buf.size() - pos < n) throw FormatError("parameter file truncated");
  }
  bool at_end() const { return pos == buf.size(); }

 private:
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{buf[pos + i]} << (8 * i);
    pos += static_cast<std::size_t>(n);
    return v;
  }
  const std::vector<unsigned char>& buf;
  std::size_t pos = 0;
};

}  // namespace

std::vector<unsigned char> encode_param_file(const ParamFile& file) {
  Writer w;
  w.bytes(kParamFileMagic, sizeof kParamFileMagic);
  w.u32(kParamFileVersion);
  w.u32(static_cast<std::uint32_t>(file.kind));
  w.u32(static_cast<std::uint32_t>(file.metadata.size()));
  w.bytes(file.metadata.data(), file.metadata.size());
  w.u32(static_cast<std::uint32_t>(file.layer_dims.size()));
  for (auto d : file.layer_dims) w.u64(d);
  w.u64(file.entries.size());
  for (const auto& e : file.entries) {
    w.u32(e.round);
    w.u32(static_cast<std::uint32_t>(e.client));
    w.u32(static_cast<std::uint32_t>(e.role));
    w.u64(e.values.size());
    for (double v : e.values) w.f64(v);
  }
  return std::move(w.out);
}

ParamFile decode_param_file(const std::vector<unsigned char>& bytes) {
  Reader r(bytes);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kParamFileMagic, sizeof magic) != 0)
    throw FormatError("not a parameter file (bad magic)");
  if (r.u32() != kParamFileVersion) throw FormatError("unsupported parameter file version");
  ParamFile file;
  const std::uint32_t kind = r.u32();
  if (kind > 1) throw FormatError("unknown parameter file kind");
  file.kind = static_cast<ParamFileKind>(kind);
  const std::uint32_t meta_len = r.u32();
  file.metadata.resize(meta_len);
  r.bytes(file.metadata.data(), meta_len);
  const std::uint32_t num_dims = r.u32();
  r.need(std::size_t{num_dims} * 8);
  for (std::uint32_t i = 0; i < num_dims; ++i) file.layer_dims.push_back(r.u64());
  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    ParamEntry e;
    e.round = r.u32();
    e.client = static_cast<std::int32_t>(r.u32());
    const std::uint32_t role = r.u32();
    if (role > static_cast<std::uint32_t>(EntryRole::kTargetLocal))
      throw FormatError("unknown entry role " + std::to_string(role));
    e.role = static_cast<EntryRole>(role);
    const std::uint64_t len = r.u64();
    if (len > bytes.size() / 8) throw FormatError("parameter file truncated");
    r.need(len * 8);
    e.values.resize(len);
    for (auto& v : e.values) v = r.f64();
    file.entries.push_back(std::move(e));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after parameter entries");
  return file;
}

void write_param_file(const std::string& path, const ParamFile& file) {
  const auto bytes = encode_param_file(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path);
}

ParamFile read_param_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  return decode_param_file(bytes);
}

ParamFile history_to_file(const FederationHistory& history, std::string metadata) {
  ParamFile file;
  file.kind = ParamFileKind::kHistory;
  file.metadata = std::move(metadata);
  for (auto d : history.initial.layout().dims()) file.layer_dims.push_back(d);
  file.entries.push_back({0, -1, EntryRole::kInitial, history.initial.raw()});
  for (const auto& rec : history.rounds) {
    const auto round = static_cast<std::uint32_t>(rec.round);
    file.entries.push_back({round, -1, EntryRole::kGlobalBefore, rec.global_before.raw()});
    file.entries.push_back({round, -1, EntryRole::kWeights, rec.weights});
    for (std::size_t i = 0; i < rec.locals.size(); ++i)
      file.entries.push_back(
          {round, static_cast<std::int32_t>(i), EntryRole::kLocal, rec.locals[i].raw()});
    file.entries.push_back({round, -1, EntryRole::kGlobalAfter, rec.global_after.raw()});
  }
  file.entries.push_back({static_cast<std::uint32_t>(history.rounds.size()), -1,
                          EntryRole::kFinalGlobal, history.final_global().raw()});
  return file;
}

FederationHistory history_from_file(const ParamFile& file) {
  if (file.kind != ParamFileKind::kHistory) throw FormatError("not a history file");
  std::vector<std::size_t> dims(file.layer_dims.begin(), file.layer_dims.end());
  LayoutPtr layout;
  try {
    layout = LayerLayout::make(dims);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad layer dims: ") + e.what());
  }
  auto params = [&](const ParamEntry& e) {
    if (e.values.size() != layout->total())
      throw FormatError("entry length does not match layer layout");
    return ParamVector(layout, e.values);
  };

  FederationHistory h;
  bool have_initial = false;
  bool have_final = false;
  for (const auto& e : file.entries) {
    switch (e.role) {
      case EntryRole::kInitial:
        h.initial = params(e);
        have_initial = true;
        break;
      case EntryRole::kGlobalBefore:
        if (e.round != h.rounds.size()) throw FormatError("rounds out of order");
        h.rounds.emplace_back();
        h.rounds.back().round = e.round;
        h.rounds.back().global_before = params(e);
        break;
      case EntryRole::kWeights:
      case EntryRole::kLocal:
      case EntryRole::kGlobalAfter: {
        if (h.rounds.empty() || h.rounds.back().round != e.round)
          throw FormatError("round entry without global_before");
        auto& rec = h.rounds.back();
        if (e.role == EntryRole::kWeights) {
          rec.weights = e.values;
        } else if (e.role == EntryRole::kLocal) {
          if (e.client != static_cast<std::int32_t>(rec.locals.size()))
            throw FormatError("local entries out of client order");
          rec.locals.push_back(params(e));
        } else {
          rec.global_after = params(e);
        }
        break;
      }
      case EntryRole::kFinalGlobal:
        params(e);
        have_final = true;
        break;
      default:
        throw FormatError("unexpected entry role in history file");
    }
  }
  if (!have_initial || !have_final) throw FormatError("history file missing initial/final model");
  for (const auto& rec : h.rounds)
    if (rec.locals.size() != rec.weights.size() || rec.locals.empty() ||
        rec.global_after.size() == 0)
      throw FormatError("incomplete round record " + std::to_string(rec.round));
  return h;
}

}  // namespace ulsim
