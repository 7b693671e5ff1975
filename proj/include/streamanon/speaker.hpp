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

#ifndef STREAMANON_SPEAKER_HPP_
#define STREAMANON_SPEAKER_HPP_

#include <cstdint>
#include <filesystem>

#include "streamanon/dsp.hpp"
#include "streamanon/layers.hpp"

namespace streamanon {

enum class EmbeddingSource { kToy, kExternal, kMixed };

// Unit-norm speaker vector (the global condition of the converter).
struct SpeakerEmbedding {
  RowVec values;
  EmbeddingSource source = EmbeddingSource::kToy;

  int dim() const { return static_cast<int>(values.size()); }
};

inline constexpr double kMinSpeakerAudioSeconds = 0.5;

// Mean and standard deviation of log-mel frames, passed through a fixed
// seeded random projection and L2-normalized. The mean part is centered
// across bins, so overall loudness does not move the embedding.
class SpeakerEmbedder {
 public:
  explicit SpeakerEmbedder(int dim = 64, std::uint64_t seed = 3);

  SpeakerEmbedding extract(const AudioChunk& audio) const;
  int dim() const { return static_cast<int>(projection_.cols()); }
  std::uint64_t seed() const { return seed_; }

 private:
  Tensor projection_;  // (2 * kMelBins) x dim
  std::uint64_t seed_;
};

// Returns v / |v|; throws DataError for a zero or non-finite vector.
RowVec unit_normalize(const RowVec& v);

double cosine_similarity(const RowVec& a, const RowVec& b);

// File layout: "SPKE", u32 dim, float32[dim].
void save_embedding(const std::filesystem::path& path, const SpeakerEmbedding& e);
SpeakerEmbedding load_embedding(const std::filesystem::path& path, int expected_dim);

}  // namespace streamanon

#endif  // STREAMANON_SPEAKER_HPP_
