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

#include "streamanon/anonymizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "streamanon/wav.hpp"

namespace streamanon {
namespace {

using json = nlohmann::json;

const std::set<std::string>& known_emotions() {
  static const std::set<std::string> kSet = {"angry", "neutral", "sad",     "happy",
                                             "fear",  "disgust", "surprise", "calm"};
  return kSet;
}

const PromptEntry& pick(const std::vector<const PromptEntry*>& from, Rng& rng) {
  std::uniform_int_distribution<std::size_t> u(0, from.size() - 1);
  return *from[u(rng)];
}

std::string coverage_error(const std::string& strategy, const std::string& need) {
  return "prompt pool cannot serve " + strategy + ": needs " + need;
}

json entry_json(const PromptEntry& e) {
  return json{{"path", e.audio_path.string()},
              {"dataset", dataset_name(e.dataset)},
              {"speaker", e.speaker},
              {"emotion", e.emotion},
              {"duration", e.duration_seconds}};
}

PromptEntry entry_from_json(const json& j) {
  PromptEntry e;
  e.audio_path = j.at("path").get<std::string>();
  e.dataset = parse_dataset(j.at("dataset").get<std::string>());
  e.speaker = j.at("speaker").get<std::string>();
  e.emotion = j.value("emotion", std::string());
  e.duration_seconds = j.at("duration").get<double>();
  if (!(e.duration_seconds > 0.0)) {
    throw DataError("prompt entry " + e.audio_path.string() + " has non-positive duration");
  }
  return e;
}

json row_json(const RowVec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

RowVec row_from_json(const json& j) {
  RowVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string dataset_name(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kVctk: return "VCTK";
    case DatasetTag::kVoxCeleb1: return "VoxCeleb1";
    case DatasetTag::kCremaD: return "CREMA-D";
    case DatasetTag::kEsd: return "ESD";
  }
  return "?";
}

DatasetTag parse_dataset(const std::string& name) {
  for (DatasetTag t : kAllDatasets) {
    if (dataset_name(t) == name) return t;
  }
  throw DataError("unknown dataset tag '" + name +
                  "' (expected VCTK, VoxCeleb1, CREMA-D or ESD)");
}

// --- pool -----------------------------------------------------------------

PromptPool::PromptPool(std::vector<PromptEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!(e.duration_seconds > 0.0)) {
      throw DataError("prompt entry " + e.audio_path.string() + " has non-positive duration");
    }
  }
}

PromptPool PromptPool::load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prompt manifest " + path.string());
  std::vector<PromptEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      entries.push_back(entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return PromptPool(std::move(entries));
}

std::string PromptPool::manifest_text() const {
  std::string out;
  for (const auto& e : entries_) out += entry_json(e).dump() + "\n";
  return out;
}

void PromptPool::save_manifest(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write prompt manifest " + path.string());
  out << manifest_text();
}

PromptPool PromptPool::build_from_directory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("pool root is not a directory: " + root.string());
  std::vector<PromptEntry> entries;
  for (const auto& item : fs::recursive_directory_iterator(root)) {
    if (!item.is_regular_file() || item.path().extension() != ".wav") continue;
    const fs::path rel = fs::relative(item.path(), root);
    std::vector<std::string> parts(rel.begin(), rel.end());
    if (parts.size() != 3) {
      throw DataError("expected <dataset>/<speaker>/<file>.wav, got " + rel.string());
    }
    PromptEntry e;
    e.audio_path = item.path();
    e.dataset = parse_dataset(parts[0]);
    e.speaker = parts[1];
    const std::string stem = item.path().stem().string();
    const auto us = stem.rfind('_');
    if (us != std::string::npos && known_emotions().count(stem.substr(us + 1))) {
      e.emotion = stem.substr(us + 1);
    }
    e.duration_seconds = wav_duration_seconds(item.path());
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const PromptEntry& a, const PromptEntry& b) { return a.audio_path < b.audio_path; });
  return PromptPool(std::move(entries));
}

// --- selection ------------------------------------------------------------

SelectionStrategy SelectionStrategy::parse(const std::string& name,
                                           const std::string& fixed_speaker) {
  static const std::map<std::string, StrategyName> kNames = {
      {"vctk-1fix", StrategyName::kVctk1Fix},
      {"vctk-1rnd", StrategyName::kVctk1Rnd},
      {"vctk-4rnd", StrategyName::kVctk4Rnd},
      {"cross-ds-4rnd", StrategyName::kCrossDs4Rnd},
      {"cremad-emo-4rnd", StrategyName::kCremadEmo4Rnd}};
  const auto it = kNames.find(name);
  if (it == kNames.end()) {
    throw ConfigError("unknown strategy '" + name +
                      "' (vctk-1fix, vctk-1rnd, vctk-4rnd, cross-ds-4rnd, cremad-emo-4rnd)");
  }
  return SelectionStrategy{it->second, fixed_speaker};
}

std::string SelectionStrategy::to_string() const {
  switch (name) {
    case StrategyName::kVctk1Fix: return "vctk-1fix";
    case StrategyName::kVctk1Rnd: return "vctk-1rnd";
    case StrategyName::kVctk4Rnd: return "vctk-4rnd";
    case StrategyName::kCrossDs4Rnd: return "cross-ds-4rnd";
    case StrategyName::kCremadEmo4Rnd: return "cremad-emo-4rnd";
  }
  return "?";
}

std::vector<PromptEntry> select_prompts(const PromptPool& pool,
                                        const SelectionStrategy& strategy, Rng& rng) {
  const std::string sname = strategy.to_string();
  std::vector<const PromptEntry*> vctk;
  for (const auto& e : pool.entries()) {
    if (e.dataset == DatasetTag::kVctk) vctk.push_back(&e);
  }
  std::vector<PromptEntry> out;
  switch (strategy.name) {
    case StrategyName::kVctk1Fix: {
      std::string speaker = strategy.fixed_speaker;
      if (speaker.empty()) {
        if (vctk.empty()) throw DataError(coverage_error(sname, "a VCTK entry"));
        speaker = (*std::min_element(vctk.begin(), vctk.end(), [](auto* a, auto* b) {
                    return a->speaker < b->speaker;
                  }))->speaker;
      }
      std::vector<const PromptEntry*> own;
      for (auto* e : vctk) {
        if (e->speaker == speaker) own.push_back(e);
      }
      if (own.empty()) throw DataError(coverage_error(sname, "VCTK speaker '" + speaker + "'"));
      out.push_back(pick(own, rng));
      break;
    }
    case StrategyName::kVctk1Rnd:
      if (vctk.empty()) throw DataError(coverage_error(sname, "a VCTK entry"));
      out.push_back(pick(vctk, rng));
      break;
    case StrategyName::kVctk4Rnd: {
      if (vctk.size() < 4) throw DataError(coverage_error(sname, "4 VCTK entries"));
      std::vector<const PromptEntry*> chosen;
      std::sample(vctk.begin(), vctk.end(), std::back_inserter(chosen), 4, rng);
      for (auto* e : chosen) out.push_back(*e);
      break;
    }
    case StrategyName::kCrossDs4Rnd:
      for (DatasetTag tag : kAllDatasets) {
        std::vector<const PromptEntry*> from;
        for (const auto& e : pool.entries()) {
          if (e.dataset == tag) from.push_back(&e);
        }
        if (from.empty()) throw DataError(coverage_error(sname, "a " + dataset_name(tag) + " entry"));
        out.push_back(pick(from, rng));
      }
      break;
    case StrategyName::kCremadEmo4Rnd:
      for (const char* emotion : kCremadEmotions) {
        std::vector<const PromptEntry*> from;
        for (const auto& e : pool.entries()) {
          if (e.dataset == DatasetTag::kCremaD && e.emotion == emotion) from.push_back(&e);
        }
        if (from.empty()) {
          throw DataError(coverage_error(sname, std::string("a CREMA-D '") + emotion + "' entry"));
        }
        out.push_back(pick(from, rng));
      }
      break;
  }
  return out;
}

// --- context --------------------------------------------------------------

double AnonContext::total_prompt_seconds() const {
  double total = 0.0;
  for (const auto& c : crops) total += c.duration_seconds();
  return total;
}

std::string AnonContext::to_json() const {
  json j;
  j["strategy"] = strategy;
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["g_anon"] = row_json(g_anon.values);
  j["prompt_content"] = prompt_content;
  json frames = json::array();
  for (const auto& f : prompt_acoustic) frames.push_back(f.codes);
  j["prompt_acoustic"] = frames;
  json crops_j = json::array();
  for (const auto& c : crops) {
    json cj = entry_json(c.entry);
    cj["start_sample"] = c.start_sample;
    cj["num_samples"] = c.num_samples;
    cj["sample_rate"] = c.sample_rate;
    crops_j.push_back(cj);
  }
  j["crops"] = crops_j;
  json embs = json::array();
  for (const auto& e : prompt_embeddings) embs.push_back(row_json(e));
  j["prompt_embeddings"] = embs;
  return j.dump() + "\n";
}

AnonContext AnonContext::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    AnonContext c;
    c.strategy = j.at("strategy").get<std::string>();
    c.alpha = j.at("alpha").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.g_anon.values = row_from_json(j.at("g_anon"));
    c.g_anon.source = EmbeddingSource::kMixed;
    c.prompt_content = j.at("prompt_content").get<std::vector<ContentToken>>();
    for (const auto& f : j.at("prompt_acoustic")) {
      c.prompt_acoustic.push_back(AcousticFrame{f.get<std::vector<int>>()});
    }
    for (const auto& cj : j.at("crops")) {
      PromptCrop crop;
      crop.entry = entry_from_json(cj);
      crop.start_sample = cj.at("start_sample").get<std::int64_t>();
      crop.num_samples = cj.at("num_samples").get<std::int64_t>();
      crop.sample_rate = cj.at("sample_rate").get<int>();
      c.crops.push_back(std::move(crop));
    }
    for (const auto& e : j.at("prompt_embeddings")) c.prompt_embeddings.push_back(row_from_json(e));
    if (c.prompt_content.size() != c.prompt_acoustic.size()) {
      throw DataError("context prompt content/acoustic length mismatch");
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed context: ") + e.what());
  }
}

void AnonContext::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write context " + path.string());
  out << to_json();
  if (!out) throw DataError("failed writing context " + path.string());
}

AnonContext AnonContext::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open context " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

AudioChunk load_prompt_audio(const PromptEntry& entry) { return read_wav(entry.audio_path); }

std::vector<PromptCrop> plan_crops(const std::vector<PromptEntry>& entries,
                                   const std::vector<std::int64_t>& lengths, Rng& rng) {
  if (entries.empty()) throw DataError("no prompt entries");
  if (entries.size() != lengths.size()) throw ShapeError("entries/lengths mismatch");
  const double cap_s = entries.size() == 1
                           ? kMaxPromptSeconds
                           : std::min(kMaxCropSeconds, kMaxPromptSeconds / entries.size());
  std::vector<PromptCrop> crops;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto cap = static_cast<std::int64_t>(std::floor(cap_s * kSampleRate));
    PromptCrop c;
    c.entry = entries[i];
    c.num_samples = std::min(lengths[i], cap);
    const std::int64_t slack = lengths[i] - c.num_samples;
    c.start_sample = slack > 0 ? std::uniform_int_distribution<std::int64_t>(0, slack)(rng) : 0;
    crops.push_back(std::move(c));
  }
  return crops;
}

RowVec sample_pseudo_speaker(int dim, double norm, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  RowVec g(dim);
  for (int i = 0; i < dim; ++i) g[i] = n01(rng);
  return g * (norm / g.norm());
}

SpeakerEmbedding mix_embedding(const std::vector<RowVec>& prompt_embeddings, double alpha,
                               Rng& rng) {
  if (prompt_embeddings.empty()) throw DataError("mix_embedding needs at least one prompt");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must be in [0, 1], got " + std::to_string(alpha));
  }
  const Eigen::Index dim = prompt_embeddings[0].size();
  RowVec mean = RowVec::Zero(dim);
  double mean_norm = 0.0;
  for (const auto& g : prompt_embeddings) {
    if (g.size() != dim) throw DataError("prompt embeddings differ in dimension");
    mean += g;
    mean_norm += g.norm();
  }
  const double k = static_cast<double>(prompt_embeddings.size());
  mean /= k;
  mean_norm /= k;
  const RowVec g_s = sample_pseudo_speaker(static_cast<int>(dim), mean_norm, rng);
  SpeakerEmbedding out;
  out.values = unit_normalize(alpha * mean + (1.0 - alpha) * g_s);
  out.source = EmbeddingSource::kMixed;
  return out;
}

AnonContext prepare_context(std::vector<PromptEntry> entries, Rng& rng,
                            const ContextModels& models, double alpha) {
  if (entries.empty()) throw DataError("prepare_context needs at least one prompt");
  if (!models.content || !models.codec || !models.embedder || !models.loader) {
    throw ConfigError("prepare_context needs content encoder, codec, embedder and loader");
  }
  std::shuffle(entries.begin(), entries.end(), rng);
  std::vector<AudioChunk> audio;
  std::vector<std::int64_t> lengths;
  for (const auto& e : entries) {
    AudioChunk a = models.loader(e);
    if (a.sample_rate != kSampleRate) {
      throw DataError(e.audio_path.string() + ": sample rate " + std::to_string(a.sample_rate) +
                      ", expected " + std::to_string(kSampleRate));
    }
    if (a.samples.empty()) throw DataError(e.audio_path.string() + ": empty audio");
    lengths.push_back(static_cast<std::int64_t>(a.samples.size()));
    audio.push_back(std::move(a));
  }
  AnonContext ctx;
  ctx.alpha = alpha;
  ctx.crops = plan_crops(entries, lengths, rng);
  for (std::size_t i = 0; i < audio.size(); ++i) {
    const PromptCrop& c = ctx.crops[i];
    AudioChunk crop;
    crop.sample_rate = audio[i].sample_rate;
    crop.samples.assign(audio[i].samples.begin() + c.start_sample,
                        audio[i].samples.begin() + c.start_sample + c.num_samples);
    auto tokens = models.content->encode_utterance(crop);
    auto frames = models.codec->encode_utterance(crop);
    const std::size_t t = std::min(tokens.size(), frames.size());
    ctx.prompt_content.insert(ctx.prompt_content.end(), tokens.begin(), tokens.begin() + t);
    ctx.prompt_acoustic.insert(ctx.prompt_acoustic.end(), frames.begin(), frames.begin() + t);
    ctx.prompt_embeddings.push_back(models.embedder->extract(crop).values);
  }
  ctx.g_anon = mix_embedding(ctx.prompt_embeddings, alpha, rng);
  return ctx;
}

AnonContext build_context(const PromptPool& pool, const SelectionStrategy& strategy,
                          std::uint64_t seed, const ContextModels& models, double alpha) {
  Rng rng(seed);
  AnonContext ctx = prepare_context(select_prompts(pool, strategy, rng), rng, models, alpha);
  ctx.strategy = strategy.to_string();
  ctx.seed = seed;
  return ctx;
}

std::filesystem::path context_path(const std::filesystem::path& dir, int index) {
  return dir / ("context_" + std::to_string(index) + ".json");
}

std::vector<std::filesystem::path> precompute_contexts(
    const PromptPool& pool, const SelectionStrategy& strategy, int count,
    std::uint64_t base_seed, const ContextModels& models, const std::filesystem::path& dir,
    double alpha) {
  if (count < 1) throw ConfigError("context count must be positive");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < count; ++i) {
    const AnonContext ctx = build_context(pool, strategy, base_seed + i, models, alpha);
    paths.push_back(context_path(dir, i));
    ctx.save(paths.back());
  }
  return paths;
}

}  // namespace streamanon
