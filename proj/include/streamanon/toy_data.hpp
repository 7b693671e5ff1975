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

#ifndef STREAMANON_TOY_DATA_HPP_
#define STREAMANON_TOY_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "streamanon/arvc.hpp"
#include "streamanon/content_encoder.hpp"
#include "streamanon/dsp.hpp"
#include "streamanon/layers.hpp"

namespace streamanon {

// Synthetic "speakers" differ in pitch range and spectral tilt; "phones" are
// tone identities held for one token frame (2048 samples) each.
inline constexpr int kToyTones = 8;

struct ToySpeaker {
  std::string id;
  double f0_scale = 1.0;  // multiplies every tone frequency
  double tilt = 1.0;      // harmonic h has amplitude h^-tilt
  double level = 0.3;
};

ToySpeaker toy_speaker(int index);

// Emotion shifts pitch and level ("angry", "happy", "sad", "neutral", ...).
ToySpeaker with_emotion(ToySpeaker speaker, const std::string& emotion);

std::vector<int> random_tones(Rng& rng, int frames);

// One tone per frame; phase-continuous, short raised-cosine edges.
AudioChunk render_tones(const ToySpeaker& speaker, const std::vector<int>& tones, Rng& rng);

// Frames of `clips` random 8-tone clips from training speakers 0..7, stacked
// as rows of 2048 samples; the codec warm-start set.
Tensor toy_codec_warmup(Rng& rng, int clips);

// Speaker-independent teacher features: a fixed random code per tone.
Tensor tone_features(const std::vector<int>& tones, int dim);

DistillExample toy_distill_example(Rng& rng, int speaker_index, int frames, int target_dim);

// Copy task in token space: codes of frame t are a fixed function of c_t.
struct CopyTask {
  int content_vocab = 64;
  int codebooks = 8;
  int acoustic_vocab = 1024;
  int speaker_dim = 64;
  std::uint64_t seed = 21;

  std::vector<std::vector<int>> table() const;  // [codebook][content]
  RowVec speaker() const;                       // fixed unit embedding
  ArvcExample example(Rng& rng, int frames) const;
  std::vector<ArvcExample> batch(Rng& rng, int count, int frames) const;
};

// Writes root/<dataset>/<speaker>/<utt>[_<emotion>].wav covering VCTK (4
// speakers), VoxCeleb1, CREMA-D and ESD (all four CREMA-D emotions).
void write_toy_pool(const std::filesystem::path& root, std::uint64_t seed);

// 3 s-style toy source utterance.
AudioChunk toy_source(double seconds, std::uint64_t seed);

}  // namespace streamanon

#endif  // STREAMANON_TOY_DATA_HPP_
