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

#include "streamanon/streaming.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

namespace streamanon {
namespace {

std::vector<double> measured(const std::vector<double>& all) {
  if (static_cast<int>(all.size()) > kWarmupChunks) {
    return {all.begin() + kWarmupChunks, all.end()};
  }
  return all;
}

}  // namespace

std::int64_t chunk_samples(double chunk_ms) {
  if (!(chunk_ms > 0.0)) throw ConfigError("chunk_ms must be positive");
  const auto frames = static_cast<std::int64_t>(std::llround(chunk_ms / kFrameMs));
  if (frames < 1 || std::abs(chunk_ms - frames * kFrameMs) > 1.0 * frames) {
    throw ConfigError("chunk_ms " + std::to_string(chunk_ms) +
                      " is not a whole number of 46.44 ms frames");
  }
  return frames * kFrameSamples;
}

double SessionMetrics::mean_inference_ms() const {
  const auto v = measured(inference_ms);
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SessionMetrics::p95_inference_ms() const {
  auto v = measured(inference_ms);
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

double SessionMetrics::rtf() const { return measure_rtf(mean_inference_ms(), chunk_ms); }

double SessionMetrics::predicted_latency_ms() const {
  return predict_latency(chunk_ms, delay, kFrameMs, mean_inference_ms());
}

double predict_latency(double chunk_ms, int delay, double frame_ms, double inference_ms) {
  return chunk_ms + delay * frame_ms + inference_ms;
}

double measure_rtf(double inference_ms, double chunk_ms) {
  if (!(chunk_ms > 0.0)) throw ConfigError("chunk_ms must be positive");
  return inference_ms / chunk_ms;
}

// --- session --------------------------------------------------------------

namespace {

const ArvcModel& checked_arvc(const PipelineModels& m, const AnonContext& ctx) {
  if (!m.content || !m.codec || !m.arvc) throw ConfigError("pipeline models not loaded");
  const ArvcConfig& a = m.arvc->config();
  if (a.content_vocab != m.content->config().codebook_size) {
    throw ConfigError("converter content vocabulary (" + std::to_string(a.content_vocab) +
                      ") does not match the content encoder codebook (" +
                      std::to_string(m.content->config().codebook_size) + ")");
  }
  if (a.codebooks != m.codec->config().codebooks ||
      a.acoustic_vocab != m.codec->config().codebook_size) {
    throw ConfigError("converter acoustic shape does not match the codec");
  }
  if (ctx.g_anon.dim() != a.speaker_dim) {
    throw ConfigError("context embedding has dim " + std::to_string(ctx.g_anon.dim()) +
                      ", converter expects " + std::to_string(a.speaker_dim));
  }
  return *m.arvc;
}

}  // namespace

StreamingSession::StreamingSession(const PipelineModels& models, const SessionConfig& config,
                                   const AnonContext& context)
    : models_(models),
      config_(config),
      content_state_((checked_arvc(models, context), models.content->make_state())),
      codec_state_(models.codec->make_state()),
      gen_(*models.arvc, context.g_anon.values, context.prompt_content, context.prompt_acoustic,
           config.delay, config.decode) {
  chunk_samples(config.chunk_ms);
  if (config.delay < 1 || config.delay > kMaxDelay) {
    throw ConfigError("session delay must be in [1, 8], got " + std::to_string(config.delay));
  }
  metrics_.chunk_ms = config.chunk_ms;
  metrics_.delay = config.delay;
}

AudioChunk StreamingSession::run(const AudioChunk& chunk, bool final) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<AcousticFrame> ready;
  if (!chunk.samples.empty()) {
    const auto tokens = models_.content->encode_chunk(chunk, content_state_);
    for (ContentToken c : tokens) {
      tokens_.push_back(c);
      if (auto f = gen_.step(c)) ready.push_back(std::move(*f));
    }
  }
  if (final) {
    auto tail = gen_.flush();
    ready.insert(ready.end(), std::make_move_iterator(tail.begin()),
                 std::make_move_iterator(tail.end()));
  }
  AudioChunk out = models_.codec->decode_frames(ready, codec_state_);
  frames_.insert(frames_.end(), ready.begin(), ready.end());
  if (config_.per_chunk_overhead_ms > 0.0) {
    std::this_thread::sleep_for(
        std::chrono::duration<double, std::milli>(config_.per_chunk_overhead_ms));
  }
  const auto stop = std::chrono::steady_clock::now();
  if (!final) {
    metrics_.inference_ms.push_back(
        std::chrono::duration<double, std::milli>(stop - start).count());
  }
  metrics_.frames_in = static_cast<std::int64_t>(tokens_.size());
  metrics_.frames_out = static_cast<std::int64_t>(frames_.size());
  return out;
}

AudioChunk StreamingSession::push(const AudioChunk& chunk) {
  if (finished_) throw StateError("session already finished");
  if (chunk.sample_rate != kSampleRate) {
    throw ConfigError("chunk sample rate " + std::to_string(chunk.sample_rate) + ", expected " +
                      std::to_string(kSampleRate));
  }
  metrics_.input_samples += static_cast<std::int64_t>(chunk.samples.size());
  AudioChunk out = run(chunk, false);
  metrics_.output_samples += static_cast<std::int64_t>(out.samples.size());
  return out;
}

AudioChunk StreamingSession::finish() {
  if (finished_) throw StateError("session already finished");
  finished_ = true;
  AudioChunk pad;
  pad.sample_rate = kSampleRate;
  const std::int64_t partial = metrics_.input_samples % kFrameSamples;
  if (partial) pad.samples.assign(static_cast<std::size_t>(kFrameSamples - partial), 0.0f);
  AudioChunk out = run(pad, true);
  const std::int64_t keep = metrics_.input_samples - metrics_.output_samples;
  out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(keep, 0)));
  metrics_.output_samples += static_cast<std::int64_t>(out.samples.size());
  return out;
}

AudioChunk SessionResult::concatenated() const {
  AudioChunk all;
  all.sample_rate = kSampleRate;
  for (const auto& c : chunks) all.samples.insert(all.samples.end(), c.samples.begin(), c.samples.end());
  return all;
}

SessionResult run_session(const std::vector<AudioChunk>& source, const SessionConfig& config,
                          const AnonContext& context, const PipelineModels& models) {
  StreamingSession session(models, config, context);
  SessionResult result;
  for (const auto& chunk : source) result.chunks.push_back(session.push(chunk));
  result.chunks.push_back(session.finish());
  result.metrics = session.metrics();
  return result;
}

std::vector<AudioChunk> split_chunks(const AudioChunk& audio, std::int64_t chunk_samples) {
  if (chunk_samples < 1) throw ConfigError("chunk size must be positive");
  std::vector<AudioChunk> out;
  const auto n = static_cast<std::int64_t>(audio.samples.size());
  for (std::int64_t start = 0; start < n; start += chunk_samples) {
    AudioChunk c;
    c.sample_rate = audio.sample_rate;
    c.samples.assign(audio.samples.begin() + start,
                     audio.samples.begin() + std::min(n, start + chunk_samples));
    out.push_back(std::move(c));
  }
  return out;
}

AudioChunk synthetic_audio(double seconds, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> f0_dist(110.0, 260.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  AudioChunk a;
  a.sample_rate = kSampleRate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * kSampleRate));
  a.samples.resize(n);
  const double f0 = f0_dist(rng), f1 = f0_dist(rng);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    const double f = f0 + (f1 - f0) * (seconds > 0 ? t / seconds : 0.0);
    phase += 2.0 * std::numbers::pi * f / kSampleRate;
    const double v = 0.3 * std::sin(phase) + 0.15 * std::sin(2.0 * phase) +
                     0.05 * std::sin(3.0 * phase) + noise(rng);
    a.samples[i] = static_cast<float>(v);
  }
  return a;
}

AnonContext prompt_free_context(int speaker_dim, std::uint64_t seed) {
  Rng rng(seed);
  AnonContext ctx;
  ctx.g_anon.values = sample_pseudo_speaker(speaker_dim, 1.0, rng);
  ctx.g_anon.source = EmbeddingSource::kMixed;
  ctx.alpha = 0.0;
  ctx.seed = seed;
  ctx.strategy = "none";
  return ctx;
}

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["chunk_ms"] = metrics.chunk_ms;
  j["delay"] = metrics.delay;
  j["frame_ms"] = kFrameMs;
  j["audio_seconds"] = audio_seconds;
  j["chunks"] = metrics.inference_ms.size();
  j["warmup_chunks"] = metrics.inference_ms.size() > kWarmupChunks ? kWarmupChunks : 0;
  j["mean_inference_ms"] = metrics.mean_inference_ms();
  j["p95_inference_ms"] = metrics.p95_inference_ms();
  j["rtf"] = metrics.rtf();
  j["predicted_latency_ms"] = metrics.predicted_latency_ms();
  j["frames_in"] = metrics.frames_in;
  j["frames_out"] = metrics.frames_out;
  j["input_samples"] = metrics.input_samples;
  j["output_samples"] = metrics.output_samples;
  j["inference_ms"] = metrics.inference_ms;
  return j.dump(2) + "\n";
}

BenchReport bench(const SessionConfig& config, const PipelineModels& models,
                  const AnonContext& context, double duration_s, std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw ConfigError("bench duration must be positive");
  const AudioChunk audio = synthetic_audio(duration_s, seed);
  const auto result =
      run_session(split_chunks(audio, chunk_samples(config.chunk_ms)), config, context, models);
  BenchReport report;
  report.metrics = result.metrics;
  report.audio_seconds = audio.duration_seconds();
  return report;
}

}  // namespace streamanon
