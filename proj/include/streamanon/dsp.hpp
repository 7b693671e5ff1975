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

#ifndef STREAMANON_DSP_HPP_
#define STREAMANON_DSP_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "streamanon/common.hpp"

namespace streamanon {

// Mono PCM block in [-1, 1]. The unit of streaming ingestion.
struct AudioChunk {
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Natural-log mel energies, floored at kLogFloor.
struct MelFrame {
  std::array<double, kMelBins> bins{};
};

inline const double kLogFloor = -11.512925464970229;  // log(1e-5)

// Carry-over between chunks. `context` holds the last
// (window - hop) samples, zero-filled at stream start, so the first frame is
// left-padded and no frame ever waits on future audio.
struct FrontendState {
  std::vector<float> context = std::vector<float>(kWindowLength - kHopLength);
  std::vector<float> carry;
  std::int64_t frames_emitted = 0;
};

using RawFrame = std::vector<float>;

// Splits an incoming chunk into complete analysis windows. A window is
// emitted every kHopLength samples and always ends at the newest sample it
// consumed. Leftover samples (< hop) stay in `state.carry`.
std::vector<RawFrame> frame_stream(const AudioChunk& chunk,
                                   FrontendState& state);

// Hann-windowed power spectrum -> 160 triangular mel filters -> log.
MelFrame logmel_frame(std::span<const float> frame);

// Convenience for whole utterances: fresh state, single pass.
std::vector<MelFrame> logmel_utterance(std::span<const float> samples);

// Triangle center frequency (Hz) of mel bin `k`.
double mel_center_hz(int k);

// Shared filterbank: kMelBins rows, (kWindowLength/2 + 1) columns.
const Tensor& mel_filterbank();

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// In-place radix-2 FFT power spectrum of a real frame whose length is a
// power of two. Returns n/2 + 1 bins of |X|^2.
std::vector<double> power_spectrum(std::span<const double> frame);

}  // namespace streamanon

#endif  // STREAMANON_DSP_HPP_
