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

#ifndef STREAMANON_ARVC_HPP_
#define STREAMANON_ARVC_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streamanon/acoustic_codec.hpp"
#include "streamanon/checkpoint.hpp"
#include "streamanon/content_encoder.hpp"
#include "streamanon/layers.hpp"
#include "streamanon/optim.hpp"

namespace streamanon {

inline constexpr int kMaxDelay = 8;

enum class SlotKind {
  kSpeaker,
  kPromptContent,
  kPromptAcoustic,
  kContent,
  kWait,          // wait-for-start
  kEndOfContent,  // tail flush placeholder
  kAcoustic,
};

struct Slot {
  SlotKind kind = SlotKind::kSpeaker;
  int index = -1;  // frame index for content/acoustic slots

  bool operator==(const Slot&) const = default;
};

// Frame-interleaved token layout:
//   g, [pc_i, pa_i]*, c_0, (w | a_{i-d}), c_1, ..., then d x (eoc, a_j).
// The first d content slots are followed by a wait slot; afterwards each
// content slot c_i is followed by the acoustic frame a_{i-d}. With d = 0 it
// reduces to g, c_0, a_0, c_1, a_1, ...
struct InterleavedSequence {
  int delay = 0;
  RowVec speaker;
  std::vector<ContentToken> content;
  std::vector<AcousticFrame> acoustic;
  std::vector<ContentToken> prompt_content;
  std::vector<AcousticFrame> prompt_acoustic;
  std::vector<Slot> slots;
};

// d must be in [0, kMaxDelay]; 0 gives the undelayed layout.
InterleavedSequence build_interleaved(const RowVec& speaker,
                                      std::vector<ContentToken> content,
                                      std::vector<AcousticFrame> acoustic, int delay,
                                      std::vector<ContentToken> prompt_content = {},
                                      std::vector<AcousticFrame> prompt_acoustic = {});

// Slot kinds and indices only; the layout depends on (T, d, prompt frames).
std::vector<Slot> interleaved_slots(int frames, int delay, int prompt_frames = 0);

// True when `slots` is exactly the layout for its own content/prompt counts
// at the given delay, and complete (flushed).
bool is_valid_interleaving(const std::vector<Slot>& slots, int delay);

// Compact text form, e.g. "g c0 w c1 w c2 a0 eoc a1 eoc a2".
std::string describe_slots(const std::vector<Slot>& slots);

enum class DelayMode { kFixed, kDynamic };

struct DelaySchedule {
  DelayMode mode = DelayMode::kDynamic;
  int delay = 2;  // used by kFixed
};

int sample_delay(Rng& rng, const DelaySchedule& schedule);

struct ArvcConfig {
  int dim = 64;
  int ffn_dim = 192;
  int heads = 2;
  int slow_layers = 2;
  int fast_layers = 2;
  int codebooks = 8;
  int acoustic_vocab = 1024;
  int content_vocab = 64;
  int speaker_dim = 64;
  DelaySchedule schedule;
  std::uint64_t seed = 4;

  void write(KeyValueConfig& kv) const;
  static ArvcConfig read(const KeyValueConfig& kv);
};

// Teacher-forced outputs for a batch of interleaved sequences.
struct ArvcForward {
  Var slow_hidden;                        // batch * seq_len rows
  Var latents;                            // one row per target frame (z_t)
  std::vector<Var> logits;                // per codebook: frames x vocab
  std::vector<std::vector<int>> targets;  // per codebook: frames
  int seq_len = 0;
  int frames = 0;
};

// Interleaved two-stage converter. The slow transformer runs over slots at
// frame rate; at the slot preceding every acoustic slot its output z_t seeds
// the fast transformer, which decodes the codebooks of frame t in order.
class ArvcModel : public Layer {
 public:
  explicit ArvcModel(const ArvcConfig& config);

  ArvcForward forward(Tape& tape, const std::vector<InterleavedSequence>& batch);

  // Incremental building blocks.
  RowVec embed_slot(SlotKind kind, const RowVec* speaker, int content,
                    const AcousticFrame* frame) const;
  const Transformer& slow() const { return slow_; }
  const Transformer& fast() const { return fast_; }
  RowVec fast_input_latent(const RowVec& z) const { return z_proj_.step(z); }
  RowVec fast_input_code(int codebook, int code) const;
  RowVec head_logits(int codebook, const RowVec& h) const;

  const ArvcConfig& config() const { return config_; }
  void collect(std::vector<Parameter*>& out) override;
  std::uint64_t checksum() const;

  void save(Checkpoint& ck) const;
  static std::unique_ptr<ArvcModel> load(const Checkpoint& ck);

 private:
  void check_sequence(const InterleavedSequence& seq) const;

  ArvcConfig config_;
  Rng rng_;
  Linear speaker_proj_;
  Embedding content_emb_;
  std::vector<Embedding> acoustic_emb_;
  Parameter wait_;
  Parameter end_of_content_;
  Transformer slow_;
  Linear z_proj_;
  std::vector<Embedding> fast_emb_;
  Transformer fast_;
  std::vector<Linear> heads_;
};

// L_AR = sum over frames and codebooks of cross-entropy(logits, code).
Var ar_loss(const std::vector<Var>& logits, const std::vector<AcousticFrame>& targets);
double ar_loss(const std::vector<Tensor>& logits, const std::vector<AcousticFrame>& targets);

struct DecodeOptions {
  bool greedy = true;
  int top_k = 16;
  double temperature = 0.8;
  std::uint64_t seed = 0;
};

// Single-owner incremental generator. Consumes one content token per call,
// emits nothing for the first d tokens, then one acoustic frame per token.
class GenSession {
 public:
  GenSession(const ArvcModel& model, const RowVec& speaker,
             std::vector<ContentToken> prompt_content,
             std::vector<AcousticFrame> prompt_acoustic, int delay,
             DecodeOptions options = {});

  std::optional<AcousticFrame> step(ContentToken token);
  // Emits the remaining (pending) frames via end-of-content slots.
  std::vector<AcousticFrame> flush();

  int delay() const { return delay_; }
  int consumed() const { return consumed_; }
  int emitted() const { return emitted_; }
  int pending() const { return consumed_ - emitted_; }
  bool closed() const { return closed_; }
  const std::vector<Slot>& trace() const { return trace_; }

  // When enabled, every emitted frame stores its z_t and per-codebook logits.
  void record_outputs(bool on) { record_ = on; }
  const std::vector<RowVec>& recorded_latents() const { return latents_; }
  const std::vector<std::vector<RowVec>>& recorded_logits() const { return logits_; }

 private:
  RowVec feed(const RowVec& x) { return model_.slow().step(x, slow_cache_); }
  AcousticFrame decode_frame(const RowVec& z);
  int pick(const RowVec& logits);

  const ArvcModel& model_;
  TransformerCache slow_cache_;
  int delay_;
  DecodeOptions options_;
  Rng rng_;
  int consumed_ = 0;
  int emitted_ = 0;
  bool closed_ = false;
  std::vector<Slot> trace_;
  bool record_ = false;
  std::vector<RowVec> latents_;
  std::vector<std::vector<RowVec>> logits_;
};

struct ArvcExample {
  RowVec speaker;
  std::vector<ContentToken> content;
  std::vector<AcousticFrame> acoustic;
  std::vector<ContentToken> prompt_content;
  std::vector<AcousticFrame> prompt_acoustic;
};

struct ArvcMetrics {
  double loss_per_frame = 0.0;  // L_AR / frames
  double accuracy = 0.0;        // teacher-forced top-1 code accuracy
  int frames = 0;
};

// Models whose weights must not change while the converter trains.
struct FrozenDependencies {
  const ContentEncoder* content = nullptr;
  const AcousticCodec* codec = nullptr;
};

class ArvcTrainer {
 public:
  ArvcTrainer(ArvcModel& model, FrozenDependencies frozen = {},
              AdamWOptions options = {}, std::uint64_t seed = 13);

  // Samples d per example from `schedule`, builds interleaved sequences and
  // applies one optimizer step on L_AR (normalized per frame). Returns the
  // per-frame loss before the update.
  double train_step(const std::vector<ArvcExample>& batch, const DelaySchedule& schedule);

  ArvcMetrics evaluate(const std::vector<ArvcExample>& batch, int delay);

  // Throws StateError if a frozen dependency changed since construction.
  void verify_frozen() const;

 private:
  ArvcModel& model_;
  FrozenDependencies frozen_;
  std::uint64_t content_sum_ = 0;
  std::uint64_t codec_sum_ = 0;
  AdamW optimizer_;
  Rng rng_;
};

}  // namespace streamanon

#endif  // STREAMANON_ARVC_HPP_
