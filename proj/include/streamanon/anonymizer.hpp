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

#ifndef STREAMANON_ANONYMIZER_HPP_
#define STREAMANON_ANONYMIZER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "streamanon/acoustic_codec.hpp"
#include "streamanon/content_encoder.hpp"
#include "streamanon/layers.hpp"
#include "streamanon/speaker.hpp"

namespace streamanon {

enum class DatasetTag { kVctk, kVoxCeleb1, kCremaD, kEsd };

inline constexpr DatasetTag kAllDatasets[] = {DatasetTag::kVctk, DatasetTag::kVoxCeleb1,
                                              DatasetTag::kCremaD, DatasetTag::kEsd};

std::string dataset_name(DatasetTag tag);
// Accepts the canonical names ("VCTK", "VoxCeleb1", "CREMA-D", "ESD").
DatasetTag parse_dataset(const std::string& name);

struct PromptEntry {
  std::filesystem::path audio_path;
  DatasetTag dataset = DatasetTag::kVctk;
  std::string speaker;
  std::string emotion;  // empty when unlabeled
  double duration_seconds = 0.0;

  bool operator==(const PromptEntry&) const = default;
};

// Immutable after loading. Manifest: one JSON object per line with keys
// path, dataset, speaker, emotion, duration.
class PromptPool {
 public:
  PromptPool() = default;
  explicit PromptPool(std::vector<PromptEntry> entries);

  static PromptPool load_manifest(const std::filesystem::path& path);
  void save_manifest(const std::filesystem::path& path) const;
  std::string manifest_text() const;

  // Scans root/<dataset>/<speaker>/*.wav. A trailing "_<emotion>" in the
  // file stem (angry, neutral, sad, happy, ...) sets the emotion label.
  static PromptPool build_from_directory(const std::filesystem::path& root);

  const std::vector<PromptEntry>& entries() const { return entries_; }

 private:
  std::vector<PromptEntry> entries_;
};

enum class StrategyName { kVctk1Fix, kVctk1Rnd, kVctk4Rnd, kCrossDs4Rnd, kCremadEmo4Rnd };

struct SelectionStrategy {
  StrategyName name = StrategyName::kCrossDs4Rnd;
  // vctk-1fix only; empty picks the lexicographically first VCTK speaker.
  std::string fixed_speaker;

  static SelectionStrategy parse(const std::string& name, const std::string& fixed_speaker = "");
  std::string to_string() const;
};

inline constexpr const char* kCremadEmotions[] = {"angry", "neutral", "sad", "happy"};

std::vector<PromptEntry> select_prompts(const PromptPool& pool, const SelectionStrategy& strategy,
                                        Rng& rng);

inline constexpr double kMaxCropSeconds = 3.0;
inline constexpr double kMaxPromptSeconds = 12.0;
inline constexpr double kDefaultAlpha = 0.9;

struct PromptCrop {
  PromptEntry entry;
  std::int64_t start_sample = 0;
  std::int64_t num_samples = 0;
  int sample_rate = kSampleRate;

  double duration_seconds() const { return static_cast<double>(num_samples) / sample_rate; }
};

// Target-voice context for one anonymization session. Built from prompt
// audio only.
struct AnonContext {
  SpeakerEmbedding g_anon;
  std::vector<ContentToken> prompt_content;
  std::vector<AcousticFrame> prompt_acoustic;
  std::vector<PromptCrop> crops;  // shuffled order
  std::vector<RowVec> prompt_embeddings;
  std::string strategy;
  double alpha = kDefaultAlpha;
  std::uint64_t seed = 0;

  double total_prompt_seconds() const;

  std::string to_json() const;
  static AnonContext from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static AnonContext load(const std::filesystem::path& path);
};

using AudioLoader = std::function<AudioChunk(const PromptEntry&)>;

// Reads entry.audio_path as WAV.
AudioChunk load_prompt_audio(const PromptEntry& entry);

struct ContextModels {
  const ContentEncoder* content = nullptr;
  const AcousticCodec* codec = nullptr;
  const SpeakerEmbedder* embedder = nullptr;
  AudioLoader loader = load_prompt_audio;
};

// Crop placement: a single prompt is capped at 12 s; with K > 1 prompts each
// is capped at min(3 s, 12 s / K). Start offsets are uniform.
std::vector<PromptCrop> plan_crops(const std::vector<PromptEntry>& entries,
                                   const std::vector<std::int64_t>& lengths, Rng& rng);

// Shuffles, crops, tokenizes and embeds the prompts, then mixes g_anon.
AnonContext prepare_context(std::vector<PromptEntry> entries, Rng& rng,
                            const ContextModels& models, double alpha = kDefaultAlpha);

// Standard normal per dimension, rescaled to `norm`.
RowVec sample_pseudo_speaker(int dim, double norm, Rng& rng);

// normalize(alpha * mean(g_i) + (1 - alpha) * g_s), with g_s drawn by
// sample_pseudo_speaker at the mean prompt-embedding norm.
SpeakerEmbedding mix_embedding(const std::vector<RowVec>& prompt_embeddings, double alpha,
                               Rng& rng);

// select_prompts + prepare_context with a fresh Rng(seed).
AnonContext build_context(const PromptPool& pool, const SelectionStrategy& strategy,
                          std::uint64_t seed, const ContextModels& models,
                          double alpha = kDefaultAlpha);

std::filesystem::path context_path(const std::filesystem::path& dir, int index);

// Writes contexts with seeds base_seed + i to dir/context_<i>.json.
std::vector<std::filesystem::path> precompute_contexts(
    const PromptPool& pool, const SelectionStrategy& strategy, int count,
    std::uint64_t base_seed, const ContextModels& models, const std::filesystem::path& dir,
    double alpha = kDefaultAlpha);

}  // namespace streamanon

#endif  // STREAMANON_ANONYMIZER_HPP_
