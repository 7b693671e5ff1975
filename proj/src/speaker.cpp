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

#include "streamanon/speaker.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace streamanon {

SpeakerEmbedder::SpeakerEmbedder(int dim, std::uint64_t seed)
    : projection_(2 * kMelBins, dim), seed_(seed) {
  if (dim < 1) throw ConfigError("speaker embedding dim must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0 * kMelBins));
  for (Eigen::Index i = 0; i < projection_.size(); ++i) projection_.data()[i] = normal(rng);
}

SpeakerEmbedding SpeakerEmbedder::extract(const AudioChunk& audio) const {
  if (audio.sample_rate != kSampleRate) {
    throw ConfigError("speaker embedder expects " + std::to_string(kSampleRate) + " Hz");
  }
  if (audio.duration_seconds() < kMinSpeakerAudioSeconds) {
    throw DataError("speaker embedding needs at least 0.5 s of audio, got " +
                    std::to_string(audio.duration_seconds()) + " s");
  }
  const auto frames = logmel_utterance(audio.samples);
  const double n = static_cast<double>(frames.size());
  RowVec mean = RowVec::Zero(kMelBins);
  RowVec sq = RowVec::Zero(kMelBins);
  for (const MelFrame& f : frames) {
    for (int b = 0; b < kMelBins; ++b) {
      mean(b) += f.bins[b];
      sq(b) += f.bins[b] * f.bins[b];
    }
  }
  mean /= n;
  RowVec stats(2 * kMelBins);
  for (int b = 0; b < kMelBins; ++b) {
    stats(kMelBins + b) = std::sqrt(std::max(sq(b) / n - mean(b) * mean(b), 0.0));
  }
  stats.head(kMelBins) = mean.array() - mean.mean();
  return SpeakerEmbedding{unit_normalize(stats * projection_), EmbeddingSource::kToy};
}

RowVec unit_normalize(const RowVec& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DataError("cannot normalize a zero or non-finite embedding");
  }
  return v / norm;
}

double cosine_similarity(const RowVec& a, const RowVec& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

void save_embedding(const std::filesystem::path& path, const SpeakerEmbedding& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::uint32_t dim = static_cast<std::uint32_t>(e.values.size());
  out.write("SPKE", 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const float v = static_cast<float>(e.values(i));
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
}

SpeakerEmbedding load_embedding(const std::filesystem::path& path, int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding " + path.string());
  char magic[4];
  std::uint32_t dim = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, "SPKE", 4) != 0 ||
      !in.read(reinterpret_cast<char*>(&dim), 4)) {
    throw DataError(path.string() + ": not a speaker embedding file");
  }
  if (static_cast<int>(dim) != expected_dim) {
    throw DataError(path.string() + ": embedding dim " + std::to_string(dim) +
                    " does not match configured dim " + std::to_string(expected_dim));
  }
  std::vector<float> payload(dim);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(dim * sizeof(float)))) {
    throw DataError(path.string() + ": truncated embedding payload");
  }
  RowVec v(dim);
  for (std::uint32_t i = 0; i < dim; ++i) v(i) = payload[i];
  return SpeakerEmbedding{unit_normalize(v), EmbeddingSource::kExternal};
}

}  // namespace streamanon
