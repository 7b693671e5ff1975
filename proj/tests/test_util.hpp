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

#ifndef STREAMANON_TESTS_TEST_UTIL_HPP_
#define STREAMANON_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "streamanon/acoustic_codec.hpp"
#include "streamanon/arvc.hpp"
#include "streamanon/content_encoder.hpp"
#include "streamanon/dsp.hpp"

namespace streamanon::testing {

inline Tensor random_tensor(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, scale);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = n01(rng);
  return t;
}

inline RowVec random_row(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  return random_tensor(1, n, rng, scale);
}

inline AudioChunk noise_audio(std::size_t n, std::uint64_t seed, double level = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-level, level);
  AudioChunk a;
  a.samples.resize(n);
  for (auto& s : a.samples) s = static_cast<float>(u(rng));
  return a;
}

inline AudioChunk slice(const AudioChunk& a, std::size_t begin, std::size_t end) {
  AudioChunk out;
  out.sample_rate = a.sample_rate;
  out.samples.assign(a.samples.begin() + begin, a.samples.begin() + end);
  return out;
}

// Small dims keep unit tests fast.
inline ContentEncoderConfig tiny_content_config() {
  ContentEncoderConfig c;
  c.dim = 16;
  c.ffn_dim = 24;
  c.heads = 2;
  c.layers = 1;
  c.codebook_size = 16;
  c.target_dim = 4;
  return c;
}

inline AcousticCodecConfig tiny_codec_config() {
  AcousticCodecConfig c;
  c.dim = 16;
  c.codebooks = 3;
  c.codebook_size = 32;
  return c;
}

inline ArvcConfig tiny_arvc_config() {
  ArvcConfig c;
  c.dim = 16;
  c.ffn_dim = 24;
  c.heads = 2;
  c.slow_layers = 2;
  c.fast_layers = 1;
  c.codebooks = 3;
  c.acoustic_vocab = 32;
  c.content_vocab = 16;
  c.speaker_dim = 8;
  return c;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("streamanon_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace streamanon::testing

#endif  // STREAMANON_TESTS_TEST_UTIL_HPP_
