// Copyright 2026 The streamanon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "streamanon/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace streamanon {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), 4);
}

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void doubles(double* dst, std::size_t count) {
    need(count * 8);
    std::memcpy(dst, bytes_.data() + pos_, count * 8);
    pos_ += count * 8;
  }
  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::serialize() const {
  std::string out = "SACK";
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(config.values().size()));
  for (const auto& [k, v] : config.values()) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_str(out, name);
    put_u32(out, static_cast<std::uint32_t>(t.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.cols()));
    out.append(reinterpret_cast<const char*>(t.data()),
               static_cast<std::size_t>(t.size()) * sizeof(double));
  }
  return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  Reader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "SACK", 4) != 0) throw DataError("not a checkpoint file");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const std::uint32_t n_config = r.u32();
  for (std::uint32_t i = 0; i < n_config; ++i) {
    std::string k = r.str();
    ck.config.set(k, r.str());
  }
  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    Tensor t(rows, cols);
    r.doubles(t.data(), static_cast<std::size_t>(rows) * cols);
    ck.tensors.emplace(std::move(name), std::move(t));
  }
  if (!r.done()) throw DataError("trailing bytes after checkpoint");
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

void Checkpoint::put(const std::string& section,
                     const std::vector<Parameter*>& params) {
  for (const Parameter* p : params) tensors[section + "/" + p->name] = p->value;
}

void Checkpoint::get(const std::string& section,
                     const std::vector<Parameter*>& params) const {
  for (Parameter* p : params) {
    const auto it = tensors.find(section + "/" + p->name);
    if (it == tensors.end()) {
      throw DataError("checkpoint is missing tensor " + section + "/" + p->name);
    }
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw DataError("checkpoint tensor " + it->first + " has shape " +
                      std::to_string(it->second.rows()) + "x" +
                      std::to_string(it->second.cols()) + ", model expects " +
                      std::to_string(p->value.rows()) + "x" +
                      std::to_string(p->value.cols()));
    }
    p->value = it->second;
  }
}

bool Checkpoint::has_section(const std::string& section) const {
  const std::string prefix = section + "/";
  const auto it = tensors.lower_bound(prefix);
  return it != tensors.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xF];
  return s;
}

std::uint64_t parameter_checksum(const std::vector<Parameter*>& params) {
  std::string buf;
  for (const Parameter* p : params) {
    buf += p->name;
    buf.append(reinterpret_cast<const char*>(p->value.data()),
               static_cast<std::size_t>(p->value.size()) * sizeof(double));
  }
  return fnv1a64(buf);
}

}  // namespace streamanon
