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

#ifndef STREAMANON_STREAMING_HPP_
#define STREAMANON_STREAMING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "streamanon/acoustic_codec.hpp"
#include "streamanon/anonymizer.hpp"
#include "streamanon/arvc.hpp"
#include "streamanon/content_encoder.hpp"

namespace streamanon {

inline constexpr int kWarmupChunks = 3;

struct SessionConfig {
  double chunk_ms = kFrameMs;
  int delay = 2;
  DecodeOptions decode;
  // Added to every chunk's processing time (benchmark cost modelling).
  double per_chunk_overhead_ms = 0.0;
};

// Samples per chunk. chunk_ms must be within 1 ms per frame of a whole
// number of frames, so the nominal 46/92/276 ms sizes map to 1/2/6 frames.
std::int64_t chunk_samples(double chunk_ms);

struct PipelineModels {
  const ContentEncoder* content = nullptr;
  const AcousticCodec* codec = nullptr;
  const ArvcModel* arvc = nullptr;
};

struct SessionMetrics {
  double chunk_ms = 0.0;
  int delay = 0;
  std::vector<double> inference_ms;  // per pushed chunk
  std::int64_t frames_in = 0;        // content tokens consumed
  std::int64_t frames_out = 0;       // acoustic frames decoded
  std::int64_t input_samples = 0;
  std::int64_t output_samples = 0;

  // Means skip the first kWarmupChunks chunks when more are available.
  double mean_inference_ms() const;
  double p95_inference_ms() const;
  double rtf() const;
  double predicted_latency_ms() const;
};

// chunk + d * frame + inference.
double predict_latency(double chunk_ms, int delay, double frame_ms, double inference_ms);
double measure_rtf(double inference_ms, double chunk_ms);

// One anonymization stream: content encoding -> converter -> codec decoding.
// Output lags the input by d frames; finish() zero-pads the last partial
// frame, flushes, and trims so the output length equals the input length.
class StreamingSession {
 public:
  StreamingSession(const PipelineModels& models, const SessionConfig& config,
                   const AnonContext& context);

  AudioChunk push(const AudioChunk& chunk);
  AudioChunk finish();

  const SessionMetrics& metrics() const { return metrics_; }
  const std::vector<ContentToken>& content_tokens() const { return tokens_; }
  const std::vector<AcousticFrame>& acoustic_frames() const { return frames_; }
  const GenSession& generator() const { return gen_; }

 private:
  AudioChunk run(const AudioChunk& chunk, bool final);

  PipelineModels models_;
  SessionConfig config_;
  ContentEncoderState content_state_;
  CodecState codec_state_;
  GenSession gen_;
  SessionMetrics metrics_;
  std::vector<ContentToken> tokens_;
  std::vector<AcousticFrame> frames_;
  bool finished_ = false;
};

struct SessionResult {
  std::vector<AudioChunk> chunks;
  SessionMetrics metrics;

  AudioChunk concatenated() const;
};

SessionResult run_session(const std::vector<AudioChunk>& source, const SessionConfig& config,
                          const AnonContext& context, const PipelineModels& models);

// Splits audio into chunks of `chunk_samples` (last one may be shorter).
std::vector<AudioChunk> split_chunks(const AudioChunk& audio, std::int64_t chunk_samples);

// Deterministic test signal: harmonic tone sweep plus light noise.
AudioChunk synthetic_audio(double seconds, std::uint64_t seed);

// Context without prompts: g_anon is a pseudo-speaker draw.
AnonContext prompt_free_context(int speaker_dim, std::uint64_t seed);

struct BenchReport {
  SessionMetrics metrics;
  double audio_seconds = 0.0;

  std::string to_json() const;
};

BenchReport bench(const SessionConfig& config, const PipelineModels& models,
                  const AnonContext& context, double duration_s, std::uint64_t seed = 0);

}  // namespace streamanon

#endif  // STREAMANON_STREAMING_HPP_
