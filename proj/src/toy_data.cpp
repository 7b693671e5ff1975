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

#include "streamanon/toy_data.hpp"

#include <cmath>
#include <numbers>

#include "streamanon/speaker.hpp"
#include "streamanon/wav.hpp"

namespace streamanon {
namespace {

constexpr double kToneRatios[kToyTones] = {1.0, 9.0 / 8, 5.0 / 4, 4.0 / 3,
                                           3.0 / 2, 5.0 / 3, 15.0 / 8, 2.0};
constexpr double kBaseHz = 150.0;
constexpr int kHarmonics = 8;
constexpr int kEdgeSamples = 64;

void write_utterance(const std::filesystem::path& path, const ToySpeaker& speaker,
                     double seconds, Rng& rng) {
  const int frames = std::max(1, static_cast<int>(seconds * kSampleRate / kFrameSamples));
  write_wav(path, render_tones(speaker, random_tones(rng, frames), rng), WavEncoding::kPcm16);
}

}  // namespace

ToySpeaker toy_speaker(int index) {
  Rng rng(1000 + static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> f0(0.7, 1.5), tilt(0.4, 2.0), level(0.2, 0.4);
  ToySpeaker s;
  s.id = "spk" + std::to_string(index);
  s.f0_scale = f0(rng);
  s.tilt = tilt(rng);
  s.level = level(rng);
  return s;
}

ToySpeaker with_emotion(ToySpeaker speaker, const std::string& emotion) {
  if (emotion == "angry") {
    speaker.level *= 1.4;
    speaker.tilt *= 0.7;
  } else if (emotion == "happy") {
    speaker.f0_scale *= 1.15;
  } else if (emotion == "sad") {
    speaker.f0_scale *= 0.85;
    speaker.level *= 0.7;
  }
  return speaker;
}

std::vector<int> random_tones(Rng& rng, int frames) {
  std::uniform_int_distribution<int> tone(0, kToyTones - 1);
  std::vector<int> out(frames);
  for (auto& t : out) t = tone(rng);
  return out;
}

AudioChunk render_tones(const ToySpeaker& speaker, const std::vector<int>& tones, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 0.003);
  AudioChunk a;
  a.sample_rate = kSampleRate;
  a.samples.reserve(tones.size() * kFrameSamples);
  double norm = 0.0;
  for (int h = 1; h <= kHarmonics; ++h) norm += std::pow(h, -speaker.tilt);
  double phase = 0.0;
  for (int tone : tones) {
    if (tone < 0 || tone >= kToyTones) throw DataError("tone id out of range");
    const double f = kBaseHz * kToneRatios[tone] * speaker.f0_scale;
    for (int i = 0; i < kFrameSamples; ++i) {
      phase += 2.0 * std::numbers::pi * f / kSampleRate;
      double v = 0.0;
      for (int h = 1; h <= kHarmonics && h * f < 0.45 * kSampleRate; ++h) {
        v += std::pow(h, -speaker.tilt) * std::sin(h * phase);
      }
      const int edge = std::min(i, kFrameSamples - 1 - i);
      const double env =
          edge < kEdgeSamples ? 0.5 - 0.5 * std::cos(std::numbers::pi * edge / kEdgeSamples) : 1.0;
      a.samples.push_back(static_cast<float>(speaker.level * env * v / norm + noise(rng)));
    }
  }
  return a;
}

Tensor toy_codec_warmup(Rng& rng, int clips) {
  std::uniform_int_distribution<int> speaker(0, 7);
  Tensor out(static_cast<Eigen::Index>(clips) * 8, kFrameSamples);
  for (int c = 0; c < clips; ++c) {
    const AudioChunk a = render_tones(toy_speaker(speaker(rng)), random_tones(rng, 8), rng);
    for (int i = 0; i < 8 * kFrameSamples; ++i) {
      out(c * 8 + i / kFrameSamples, i % kFrameSamples) = a.samples[i];
    }
  }
  return out;
}

Tensor tone_features(const std::vector<int>& tones, int dim) {
  Rng rng(77);
  std::normal_distribution<double> n01(0.0, 1.0);
  Tensor codes(kToyTones, dim);
  for (Eigen::Index i = 0; i < codes.size(); ++i) codes.data()[i] = n01(rng);
  Tensor out(static_cast<Eigen::Index>(tones.size()), dim);
  for (std::size_t t = 0; t < tones.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = codes.row(tones[t]);
  return out;
}

DistillExample toy_distill_example(Rng& rng, int speaker_index, int frames, int target_dim) {
  const auto tones = random_tones(rng, frames);
  return DistillExample{render_tones(toy_speaker(speaker_index), tones, rng),
                        tone_features(tones, target_dim)};
}

std::vector<std::vector<int>> CopyTask::table() const {
  Rng rng(seed);
  std::uniform_int_distribution<int> code(0, acoustic_vocab - 1);
  std::vector<std::vector<int>> t(codebooks, std::vector<int>(content_vocab));
  for (auto& row : t) {
    for (auto& v : row) v = code(rng);
  }
  return t;
}

RowVec CopyTask::speaker() const {
  Rng rng(seed + 1);
  std::normal_distribution<double> n01(0.0, 1.0);
  RowVec g(speaker_dim);
  for (int i = 0; i < speaker_dim; ++i) g[i] = n01(rng);
  return unit_normalize(g);
}

ArvcExample CopyTask::example(Rng& rng, int frames) const {
  const auto codes = table();
  std::uniform_int_distribution<int> tok(0, content_vocab - 1);
  ArvcExample ex;
  ex.speaker = speaker();
  for (int t = 0; t < frames; ++t) {
    const int c = tok(rng);
    ex.content.push_back(c);
    AcousticFrame f;
    for (int k = 0; k < codebooks; ++k) f.codes.push_back(codes[k][c]);
    ex.acoustic.push_back(std::move(f));
  }
  return ex;
}

std::vector<ArvcExample> CopyTask::batch(Rng& rng, int count, int frames) const {
  std::vector<ArvcExample> out;
  for (int i = 0; i < count; ++i) out.push_back(example(rng, frames));
  return out;
}

void write_toy_pool(const std::filesystem::path& root, std::uint64_t seed) {
  namespace fs = std::filesystem;
  Rng rng(seed);
  std::uniform_real_distribution<double> dur(2.0, 6.0);
  auto dir = [&](const std::string& ds, const std::string& spk) {
    fs::path d = root / ds / spk;
    fs::create_directories(d);
    return d;
  };
  int index = 0;
  for (const char* spk : {"p001", "p002", "p003", "p004"}) {
    const ToySpeaker s = toy_speaker(index++);
    const fs::path d = dir("VCTK", spk);
    write_utterance(d / "utt01.wav", s, dur(rng), rng);
    write_utterance(d / "utt02.wav", s, index == 1 ? 10.0 : dur(rng), rng);
  }
  for (const char* spk : {"id0001", "id0002"}) {
    write_utterance(dir("VoxCeleb1", spk) / "utt01.wav", toy_speaker(index++), dur(rng), rng);
  }
  for (const char* spk : {"1001", "1002"}) {
    const ToySpeaker s = toy_speaker(index++);
    const fs::path d = dir("CREMA-D", spk);
    for (const char* emo : {"angry", "neutral", "sad", "happy"}) {
      write_utterance(d / (std::string("utt01_") + emo + ".wav"), with_emotion(s, emo), dur(rng),
                      rng);
    }
  }
  {
    const ToySpeaker s = toy_speaker(index++);
    const fs::path d = dir("ESD", "0011");
    write_utterance(d / "utt01_neutral.wav", s, dur(rng), rng);
    write_utterance(d / "utt02_happy.wav", with_emotion(s, "happy"), dur(rng), rng);
  }
}

AudioChunk toy_source(double seconds, std::uint64_t seed) {
  Rng rng(seed);
  const auto total = static_cast<std::size_t>(std::llround(seconds * kSampleRate));
  const int frames = static_cast<int>(total / kFrameSamples) + 1;
  AudioChunk a = render_tones(toy_speaker(99), random_tones(rng, frames), rng);
  a.samples.resize(total);
  return a;
}

}  // namespace streamanon
