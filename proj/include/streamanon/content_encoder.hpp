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

#ifndef STREAMANON_CONTENT_ENCODER_HPP_
#define STREAMANON_CONTENT_ENCODER_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "streamanon/checkpoint.hpp"
#include "streamanon/dsp.hpp"
#include "streamanon/layers.hpp"
#include "streamanon/optim.hpp"
#include "streamanon/vq.hpp"

namespace streamanon {

using ContentToken = int;

struct ContentEncoderConfig {
  int dim = 64;
  int ffn_dim = 192;
  int heads = 2;
  int layers = 2;
  int conv_kernel = 3;
  int down_kernel = 3;
  int codebook_size = 64;
  // Width of the distillation targets (teacher features).
  int target_dim = 16;
  double commitment_beta = 0.25;
  std::uint64_t seed = 1;

  void write(KeyValueConfig& kv) const;
  static ContentEncoderConfig read(const KeyValueConfig& kv);
};

struct ContentEncoderState {
  FrontendState frontend;
  ConvState block0, down1, block1, down2;
  TransformerCache attention;
  std::int64_t mel_frames = 0;
  std::int64_t tokens = 0;
};

struct EncodedContent {
  std::vector<ContentToken> tokens;
  std::vector<RowVec> states;  // pre-VQ encoder output per token
};

// Causal log-mel -> ConvNeXt-style downsampler (2 x stride-2) -> decoder-only
// transformer -> VQ. One token per 2048 input samples, zero look-ahead.
class ContentEncoder : public Layer {
 public:
  explicit ContentEncoder(const ContentEncoderConfig& config);

  ContentEncoderState make_state() const;

  std::vector<ContentToken> encode_chunk(const AudioChunk& chunk,
                                         ContentEncoderState& state) const;
  EncodedContent encode_chunk_detailed(const AudioChunk& chunk,
                                       ContentEncoderState& state) const;
  // Fresh state, single pass.
  std::vector<ContentToken> encode_utterance(const AudioChunk& audio) const;

  // Full-sequence pre-VQ states for one utterance of log-mel frames
  // (frames x 160 on the tape). Output rows = frames / 4.
  Var forward_states(Tape& tape, const Tensor& mel);
  // Projection of pre-VQ states onto the teacher feature space.
  Var distill_projection(Tape& tape, Var states);

  Codebook& codebook() { return codebook_; }
  const Codebook& codebook() const { return codebook_; }
  const ContentEncoderConfig& config() const { return config_; }

  void collect(std::vector<Parameter*>& out) override;
  std::uint64_t checksum() const;

  void save(Checkpoint& ck) const;
  static std::unique_ptr<ContentEncoder> load(const Checkpoint& ck);

  // Number of encode_chunk / encode_chunk_detailed invocations so far.
  std::uint64_t encode_calls() const { return encode_calls_.load(); }

 private:
  RowVec mel_input(const MelFrame& mel) const;

  ContentEncoderConfig config_;
  Rng rng_;
  Linear input_;
  CausalConvNextBlock block0_;
  CausalConv1d down1_;
  CausalConvNextBlock block1_;
  CausalConv1d down2_;
  Transformer transformer_;
  Codebook codebook_;
  Linear distill_head_;
  mutable std::atomic<std::uint64_t> encode_calls_{0};
};

// Stacked log-mel frames of an utterance (frames x 160).
Tensor mel_matrix(const AudioChunk& audio);

struct DistillExample {
  AudioChunk audio;
  Tensor targets;  // tokens x target_dim
};

// Reads the flat float32 target-feature file: u32 frames, u32 dim, payload.
Tensor load_target_features(const std::filesystem::path& path);
void save_target_features(const std::filesystem::path& path, const Tensor& t);

class DistillTrainer {
 public:
  DistillTrainer(ContentEncoder& encoder, AdamWOptions options = {},
                 std::uint64_t seed = 7);

  // Distillation MSE + VQ losses over the batch, one optimizer step.
  double train_step(const std::vector<DistillExample>& batch);
  // The same loss without touching weights.
  double evaluate(const std::vector<DistillExample>& batch);
  // Graph of the loss on `tape`; exposed for gradient checks.
  Var loss(Tape& tape, const std::vector<DistillExample>& batch,
           double* distill_only = nullptr);

 private:
  ContentEncoder& encoder_;
  AdamW optimizer_;
  Rng rng_;
  long step_ = 0;
  Tensor last_states_;
};

}  // namespace streamanon

#endif  // STREAMANON_CONTENT_ENCODER_HPP_
