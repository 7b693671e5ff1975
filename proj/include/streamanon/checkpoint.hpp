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

#ifndef STREAMANON_CHECKPOINT_HPP_
#define STREAMANON_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "streamanon/autograd.hpp"
#include "streamanon/config.hpp"

namespace streamanon {

// Versioned container of named float64 tensors plus a key/value config
// header. Layout (little-endian):
//
//   "SACK" u32 version
//   u32 n_config   { u32 len, key bytes, u32 len, value bytes }*
//   u32 n_tensors  { u32 len, name bytes, u32 rows, u32 cols, f64[rows*cols] }*
//
// Entries are written in sorted key order, so serialize(deserialize(b)) == b.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  KeyValueConfig config;
  std::map<std::string, Tensor> tensors;

  std::string serialize() const;
  static Checkpoint deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  // Stores parameters as "<section>/<param name>".
  void put(const std::string& section, const std::vector<Parameter*>& params);
  // Restores parameters; missing names or shape mismatches throw DataError.
  void get(const std::string& section, const std::vector<Parameter*>& params) const;
  bool has_section(const std::string& section) const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Hash over parameter names and raw values; used to assert frozen weights.
std::uint64_t parameter_checksum(const std::vector<Parameter*>& params);

}  // namespace streamanon

#endif  // STREAMANON_CHECKPOINT_HPP_
