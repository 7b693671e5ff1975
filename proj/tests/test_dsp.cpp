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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "streamanon/dsp.hpp"
#include "streamanon/wav.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

using testing::noise_audio;
using testing::slice;

// Offline framing: left-pad with (window - hop) zeros, cut every hop.
std::vector<RawFrame> offline_frames(const std::vector<float>& x) {
  std::vector<float> padded(kWindowLength - kHopLength, 0.0f);
  padded.insert(padded.end(), x.begin(), x.end());
  std::vector<RawFrame> out;
  for (std::size_t start = 0; start + kWindowLength <= padded.size(); start += kHopLength) {
    out.emplace_back(padded.begin() + start, padded.begin() + start + kWindowLength);
  }
  return out;
}

TEST(FrameStream, OneWindowOfAudioGivesFourFrames) {
  FrontendState state;
  const auto frames = frame_stream(noise_audio(2048, 1), state);
  EXPECT_EQ(frames.size(), 4u);
  EXPECT_TRUE(state.carry.empty());
  EXPECT_EQ(state.frames_emitted, 4);
}

TEST(FrameStream, ShortChunkIsCarried) {
  FrontendState state;
  EXPECT_TRUE(frame_stream(noise_audio(100, 2), state).empty());
  EXPECT_EQ(state.carry.size(), 100u);
}

TEST(FrameStream, MatchesOfflineFramingOracle) {
  const AudioChunk a = noise_audio(5000, 3);
  FrontendState state;
  const auto frames = frame_stream(a, state);
  const auto oracle = offline_frames(a.samples);
  ASSERT_EQ(frames.size(), oracle.size());
  EXPECT_EQ(frames.size(), 5000u / kHopLength);
  for (std::size_t i = 0; i < frames.size(); ++i) EXPECT_EQ(frames[i], oracle[i]);
  EXPECT_LT(state.carry.size(), static_cast<std::size_t>(kHopLength));
}

TEST(FrameStream, ChunkingDoesNotChangeFrames) {
  const AudioChunk a = noise_audio(2048, 4);
  FrontendState whole, split;
  const auto ref = frame_stream(a, whole);
  auto first = frame_stream(slice(a, 0, 1024), split);
  const auto second = frame_stream(slice(a, 1024, 2048), split);
  first.insert(first.end(), second.begin(), second.end());
  EXPECT_EQ(first, ref);

  std::mt19937_64 rng(5);
  const AudioChunk b = noise_audio(20000, 6);
  FrontendState s1, s2;
  const auto offline = frame_stream(b, s1);
  std::vector<RawFrame> streamed;
  std::size_t pos = 0;
  std::uniform_int_distribution<std::size_t> len(1, 3000);
  while (pos < b.samples.size()) {
    const std::size_t end = std::min(b.samples.size(), pos + len(rng));
    for (auto& f : frame_stream(slice(b, pos, end), s2)) streamed.push_back(std::move(f));
    pos = end;
  }
  EXPECT_EQ(streamed, offline);
}

TEST(FrameStream, Errors) {
  FrontendState state;
  AudioChunk wrong = noise_audio(512, 7);
  wrong.sample_rate = 16000;
  EXPECT_THROW(frame_stream(wrong, state), ConfigError);
  EXPECT_THROW(frame_stream(AudioChunk{}, state), DataError);
}

TEST(FrameStream, FramesNeverSeeFutureSamples) {
  const AudioChunk a = noise_audio(8192, 8);
  AudioChunk b = a;
  const std::size_t s = 3000;
  for (std::size_t i = s + 1; i < b.samples.size(); ++i) b.samples[i] = -b.samples[i];
  FrontendState sa, sb;
  const auto fa = frame_stream(a, sa);
  const auto fb = frame_stream(b, sb);
  for (std::size_t k = 0; k < fa.size(); ++k) {
    const std::size_t end = (k + 1) * kHopLength - 1;  // last sample index in frame k
    if (end <= s) {
      EXPECT_EQ(fa[k], fb[k]) << "frame " << k;
    }
  }
}

TEST(PowerSpectrum, MatchesNaiveDft) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<double> x(64);
  for (auto& v : x) v = n01(rng);
  const auto p = power_spectrum(x);
  ASSERT_EQ(p.size(), 33u);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / x.size());
    }
    EXPECT_NEAR(p[k], std::norm(acc), 1e-9 * (1.0 + std::norm(acc)));
  }
  EXPECT_THROW(power_spectrum(std::vector<double>(6)), ShapeError);
}

TEST(MelScale, HtkFormula) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  for (double f : {0.0, 100.0, 1000.0, 8000.0, 22050.0}) {
    EXPECT_NEAR(mel_to_hz(hz_to_mel(f)), f, 1e-9);
  }
}

TEST(MelFilterbank, TrianglesAreAreaNormalized) {
  const Tensor& fb = mel_filterbank();
  ASSERT_EQ(fb.rows(), kMelBins);
  ASSERT_EQ(fb.cols(), kWindowLength / 2 + 1);
  EXPECT_GE(fb.minCoeff(), 0.0);
  const double bin_hz = static_cast<double>(kSampleRate) / kWindowLength;
  // Triangles spanning many FFT bins integrate to ~1 over Hz.
  for (int m = 90; m < kMelBins; m += 10) {
    EXPECT_NEAR(fb.row(m).sum() * bin_hz, 1.0, 0.02) << "filter " << m;
  }
  // Independent recomputation of one filter.
  const double top = hz_to_mel(kSampleRate / 2.0);
  const int m = 100;
  const double lo = mel_to_hz(top * m / 161.0), mid = mel_to_hz(top * (m + 1) / 161.0),
               hi = mel_to_hz(top * (m + 2) / 161.0);
  for (int b = 0; b < fb.cols(); ++b) {
    const double f = b * bin_hz;
    double w = 0.0;
    if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
    if (f > mid && f < hi) w = (hi - f) / (hi - mid);
    EXPECT_NEAR(fb(m, b), w * 2.0 / (hi - lo), 1e-12);
  }
}

TEST(LogMel, SilenceHitsTheFloor) {
  const MelFrame f = logmel_frame(std::vector<float>(kWindowLength, 0.0f));
  for (double v : f.bins) EXPECT_EQ(v, kLogFloor);
}

TEST(LogMel, SinusoidPeaksAtItsBin) {
  for (int k : {40, 70, 100, 130, 155}) {
    const double f = mel_center_hz(k);
    std::vector<float> x(kWindowLength);
    for (int n = 0; n < kWindowLength; ++n) {
      x[n] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * f * n / kSampleRate));
    }
    const MelFrame m = logmel_frame(x);
    const auto it = std::max_element(m.bins.begin(), m.bins.end());
    EXPECT_EQ(it - m.bins.begin(), k) << "center " << f << " Hz";
  }
}

TEST(LogMel, DoublingAmplitudeAddsLogFour) {
  const AudioChunk a = noise_audio(kWindowLength, 10, 0.2);
  std::vector<float> twice(a.samples);
  for (auto& v : twice) v *= 2.0f;
  const MelFrame m1 = logmel_frame(a.samples), m2 = logmel_frame(twice);
  for (int k = 0; k < kMelBins; ++k) {
    if (m1.bins[k] > kLogFloor + 1.0) {
      EXPECT_NEAR(m2.bins[k] - m1.bins[k], std::log(4.0), 1e-6);
    }
  }
  EXPECT_THROW(logmel_frame(std::vector<float>(100)), ShapeError);
}

TEST(LogMel, FloorBoundAndFrameRate) {
  const auto frames = logmel_utterance(noise_audio(kSampleRate, 11).samples);
  EXPECT_EQ(frames.size(), static_cast<std::size_t>(kSampleRate / kHopLength));
  for (const auto& f : frames) {
    for (double v : f.bins) EXPECT_GE(v, kLogFloor);
  }
}

TEST(Wav, RoundTripPcm16AndFloat) {
  const auto dir = testing::scratch_dir("wav");
  const AudioChunk a = noise_audio(3000, 12, 0.9);
  write_wav(dir / "f.wav", a, WavEncoding::kFloat32);
  EXPECT_EQ(read_wav(dir / "f.wav").samples, a.samples);
  write_wav(dir / "p.wav", a, WavEncoding::kPcm16);
  const AudioChunk p = read_wav(dir / "p.wav");
  ASSERT_EQ(p.samples.size(), a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_NEAR(p.samples[i], a.samples[i], 0.5 / 32768 + 1e-9);
  EXPECT_NEAR(wav_duration_seconds(dir / "p.wav"), 3000.0 / kSampleRate, 1e-12);
  EXPECT_THROW(read_wav(dir / "missing.wav"), DataError);
}

}  // namespace
}  // namespace streamanon
