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

#ifndef STREAMANON_ACOUSTIC_CODEC_HPP_
#define STREAMANON_ACOUSTIC_CODEC_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "streamanon/checkpoint.hpp"
#include "streamanon/dsp.hpp"
#include "streamanon/layers.hpp"
#include "streamanon/optim.hpp"
#include "streamanon/vq.hpp"

namespace streamanon {

// One code per residual stage for a single 2048-sample frame.
struct AcousticFrame {
  std::vector<int> codes;

  bool operator==(const AcousticFrame&) const = default;
};

struct AcousticCodecConfig {
  int dim = 64;
  int codebooks = 8;
  int codebook_size = 1024;
  int kernel = 2;
  double commitment_beta = 0.25;
  double spectral_weight = 1.0;
  std::uint64_t seed = 2;

  void write(KeyValueConfig& kv) const;
  static AcousticCodecConfig read(const KeyValueConfig& kv);
};

struct CodecState {
  std::vector<float> carry;  // < kFrameSamples pending input samples
  ConvState encoder;
  ConvState decoder;
  std::int64_t frames_encoded = 0;
  std::int64_t frames_decoded = 0;
};

struct RvqResult {
  std::vector<int> codes;
  RowVec residual;  // left after the last stage
};

// Stage k quantizes what stages 1..k-1 left over.
RvqResult rvq_quantize(const RowVec& latent, std::span<const Codebook> stages);

// Toy causal residual-VQ codec at one frame per 2048 samples. The encoder
// maps each frame to a latent (per-frame projection plus a causal conv over
// frames); the decoder mirrors it with a causal conv and a transposed
// convolution whose kernel and stride equal the frame length.
class AcousticCodec : public Layer {
 public:
  explicit AcousticCodec(const AcousticCodecConfig& config);

  CodecState make_state() const;

  std::vector<AcousticFrame> encode_frames(const AudioChunk& audio,
                                           CodecState& state) const;
  AudioChunk decode_frames(std::span<const AcousticFrame> frames,
                           CodecState& state) const;

  std::vector<AcousticFrame> encode_utterance(const AudioChunk& audio) const;
  AudioChunk decode_utterance(std::span<const AcousticFrame> frames) const;

  RowVec dequantize(const AcousticFrame& frame) const;

  // Data-dependent init: the encoder projects onto the top principal
  // directions of `frames` (rows of 2048 samples), the decoder maps back with
  // the transpose, both residual convolutions start at zero, and each RVQ
  // stage is seeded by k-means over the residuals the earlier stages leave.
  void warm_start(const Tensor& frames, Rng& rng, int kmeans_iterations = 5);

  // Full-sequence graphs for training: frames x 2048 in, frames x dim out.
  Var encode_latents(Tape& tape, const Tensor& frames);
  Var decode_latents(Tape& tape, Var latents);

  std::vector<Codebook>& stages() { return stages_; }
  const std::vector<Codebook>& stages() const { return stages_; }
  const AcousticCodecConfig& config() const { return config_; }

  void collect(std::vector<Parameter*>& out) override;
  std::uint64_t checksum() const;

  void save(Checkpoint& ck) const;
  static std::unique_ptr<AcousticCodec> load(const Checkpoint& ck);

  std::uint64_t encode_calls() const { return encode_calls_.load(); }

 private:
  RowVec encode_frame(const RowVec& samples, ConvState& state) const;

  AcousticCodecConfig config_;
  Rng rng_;
  Linear enc_in_;
  CausalConv1d enc_conv_;
  CausalConv1d dec_conv_;
  Linear dec_out_;
  std::vector<Codebook> stages_;
  mutable std::atomic<std::uint64_t> encode_calls_{0};
};

// Samples grouped as rows of kFrameSamples (trailing partial frame dropped).
Tensor frame_matrix(const AudioChunk& audio);

// Magnitude STFT (no padding, Hann window) of a column of samples.
Var stft_magnitude(Tape& tape, Var samples_column, int window, int hop);

double snr_db(std::span<const float> reference, std::span<const float> estimate);

struct CodecLossBreakdown {
  double total = 0.0;
  double time_l1 = 0.0;
  double spectral = 0.0;
  double vq = 0.0;
};

class CodecTrainer {
 public:
  CodecTrainer(AcousticCodec& codec, AdamWOptions options = {},
               std::uint64_t seed = 11);

  double train_step(const std::vector<AudioChunk>& batch);
  CodecLossBreakdown evaluate(const std::vector<AudioChunk>& batch);
  Var loss(Tape& tape, const std::vector<AudioChunk>& batch,
           CodecLossBreakdown* parts = nullptr);

 private:
  AcousticCodec& codec_;
  AdamW optimizer_;
  Rng rng_;
  long step_ = 0;
  std::vector<Tensor> stage_inputs_;
};

}  // namespace streamanon

#endif  // STREAMANON_ACOUSTIC_CODEC_HPP_
