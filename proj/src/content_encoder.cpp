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

#include "streamanon/content_encoder.hpp"

#include <cstring>
#include <fstream>

namespace streamanon {
namespace {

constexpr char kSection[] = "content_encoder";

// Fixed affine that maps typical log-mel values to roughly unit scale.
constexpr double kMelShift = 5.0;
constexpr double kMelScale = 0.2;

}  // namespace

void ContentEncoderConfig::write(KeyValueConfig& kv) const {
  const std::string p = std::string(kSection) + ".";
  kv.set(p + "dim", std::to_string(dim));
  kv.set(p + "ffn_dim", std::to_string(ffn_dim));
  kv.set(p + "heads", std::to_string(heads));
  kv.set(p + "layers", std::to_string(layers));
  kv.set(p + "conv_kernel", std::to_string(conv_kernel));
  kv.set(p + "down_kernel", std::to_string(down_kernel));
  kv.set(p + "codebook_size", std::to_string(codebook_size));
  kv.set(p + "target_dim", std::to_string(target_dim));
  kv.set(p + "commitment_beta", std::to_string(commitment_beta));
  kv.set(p + "seed", std::to_string(seed));
}

ContentEncoderConfig ContentEncoderConfig::read(const KeyValueConfig& kv) {
  const std::string p = std::string(kSection) + ".";
  ContentEncoderConfig c;
  c.dim = kv.get_int(p + "dim", c.dim);
  c.ffn_dim = kv.get_int(p + "ffn_dim", c.ffn_dim);
  c.heads = kv.get_int(p + "heads", c.heads);
  c.layers = kv.get_int(p + "layers", c.layers);
  c.conv_kernel = kv.get_int(p + "conv_kernel", c.conv_kernel);
  c.down_kernel = kv.get_int(p + "down_kernel", c.down_kernel);
  c.codebook_size = kv.get_int(p + "codebook_size", c.codebook_size);
  c.target_dim = kv.get_int(p + "target_dim", c.target_dim);
  c.commitment_beta = kv.get_double(p + "commitment_beta", c.commitment_beta);
  c.seed = static_cast<std::uint64_t>(kv.get_int(p + "seed", static_cast<int>(c.seed)));
  return c;
}

ContentEncoder::ContentEncoder(const ContentEncoderConfig& config)
    : config_(config),
      rng_(config.seed),
      input_("ce.input", kMelBins, config.dim, true, rng_),
      block0_("ce.block0", config.dim, config.ffn_dim, config.conv_kernel, rng_),
      down1_("ce.down1", config.dim, config.dim, config.down_kernel, 2, rng_),
      block1_("ce.block1", config.dim, config.ffn_dim, config.conv_kernel, rng_),
      down2_("ce.down2", config.dim, config.dim, config.down_kernel, 2, rng_),
      transformer_("ce.transformer", config.layers, config.dim, config.ffn_dim,
                   config.heads, rng_),
      codebook_("ce.vq", config.codebook_size, config.dim, rng_),
      distill_head_("ce.distill", config.dim, config.target_dim, true, rng_) {}

ContentEncoderState ContentEncoder::make_state() const {
  ContentEncoderState s;
  s.block0 = block0_.make_state();
  s.down1 = down1_.make_state();
  s.block1 = block1_.make_state();
  s.down2 = down2_.make_state();
  s.attention = transformer_.make_cache();
  return s;
}

RowVec ContentEncoder::mel_input(const MelFrame& mel) const {
  RowVec x(kMelBins);
  for (int i = 0; i < kMelBins; ++i) x(i) = (mel.bins[i] + kMelShift) * kMelScale;
  return x;
}

EncodedContent ContentEncoder::encode_chunk_detailed(const AudioChunk& chunk,
                                                     ContentEncoderState& state) const {
  ++encode_calls_;
  EncodedContent out;
  for (const RawFrame& frame : frame_stream(chunk, state.frontend)) {
    ++state.mel_frames;
    RowVec h = input_.step(mel_input(logmel_frame(frame)));
    h = block0_.step(h, state.block0);
    auto half = down1_.step(h, state.down1);
    if (!half) continue;
    h = block1_.step(*half, state.block1);
    auto quarter = down2_.step(h, state.down2);
    if (!quarter) continue;
    RowVec z = transformer_.step(*quarter, state.attention);
    out.tokens.push_back(codebook_.quantize(z).index);
    out.states.push_back(std::move(z));
    ++state.tokens;
  }
  return out;
}

std::vector<ContentToken> ContentEncoder::encode_chunk(const AudioChunk& chunk,
                                                       ContentEncoderState& state) const {
  return encode_chunk_detailed(chunk, state).tokens;
}

std::vector<ContentToken> ContentEncoder::encode_utterance(const AudioChunk& audio) const {
  if (audio.samples.empty()) return {};
  ContentEncoderState state = make_state();
  return encode_chunk(audio, state);
}

Var ContentEncoder::forward_states(Tape& tape, const Tensor& mel) {
  if (mel.cols() != kMelBins) throw ShapeError("forward_states: expected 160 mel bins");
  const int frames = static_cast<int>(mel.rows());
  if (frames / kDownsample < 1) {
    throw DataError("utterance too short for one content token (" +
                    std::to_string(frames) + " mel frames)");
  }
  Tensor scaled = (mel.array() + kMelShift) * kMelScale;
  Var h = input_.forward(tape, tape.constant(std::move(scaled)));
  h = block0_.forward(tape, h, frames);
  h = down1_.forward(tape, h, frames);
  const int half = frames / 2;
  h = block1_.forward(tape, h, half);
  h = down2_.forward(tape, h, half);
  return transformer_.forward(tape, h, half / 2);
}

Var ContentEncoder::distill_projection(Tape& tape, Var states) {
  return distill_head_.forward(tape, states);
}

void ContentEncoder::collect(std::vector<Parameter*>& out) {
  input_.collect(out);
  block0_.collect(out);
  down1_.collect(out);
  block1_.collect(out);
  down2_.collect(out);
  transformer_.collect(out);
  codebook_.collect(out);
  distill_head_.collect(out);
}

std::uint64_t ContentEncoder::checksum() const {
  return parameter_checksum(const_cast<ContentEncoder*>(this)->parameters());
}

void ContentEncoder::save(Checkpoint& ck) const {
  config_.write(ck.config);
  ck.put(kSection, const_cast<ContentEncoder*>(this)->parameters());
}

std::unique_ptr<ContentEncoder> ContentEncoder::load(const Checkpoint& ck) {
  if (!ck.has_section(kSection)) {
    throw DataError("checkpoint has no content_encoder section");
  }
  auto enc = std::make_unique<ContentEncoder>(ContentEncoderConfig::read(ck.config));
  ck.get(kSection, enc->parameters());
  enc->codebook_.record_usage({}, 0);
  return enc;
}

Tensor mel_matrix(const AudioChunk& audio) {
  const auto frames = logmel_utterance(audio.samples);
  Tensor mel(static_cast<Eigen::Index>(frames.size()), kMelBins);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (int b = 0; b < kMelBins; ++b) mel(static_cast<Eigen::Index>(i), b) = frames[i].bins[b];
  }
  return mel;
}

Tensor load_target_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open target features " + path.string());
  std::uint32_t header[2];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw DataError(path.string() + ": truncated header");
  }
  std::vector<float> payload(static_cast<std::size_t>(header[0]) * header[1]);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size() * sizeof(float)))) {
    throw DataError(path.string() + ": truncated payload");
  }
  Tensor t(header[0], header[1]);
  for (std::size_t i = 0; i < payload.size(); ++i) t.data()[i] = payload[i];
  return t;
}

void save_target_features(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(t.rows()),
                                   static_cast<std::uint32_t>(t.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const float v = static_cast<float>(t.data()[i]);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

// --- DistillTrainer -------------------------------------------------------

DistillTrainer::DistillTrainer(ContentEncoder& encoder, AdamWOptions options,
                               std::uint64_t seed)
    : encoder_(encoder), optimizer_(encoder.parameters(), options), rng_(seed) {}

Var DistillTrainer::loss(Tape& tape, const std::vector<DistillExample>& batch,
                         double* distill_only) {
  if (batch.empty()) throw DataError("distill batch is empty");
  const double beta = encoder_.config().commitment_beta;
  std::vector<Var> terms;
  double distill_total = 0.0;
  std::vector<Tensor> seen;
  for (const DistillExample& ex : batch) {
    const Tensor mel = mel_matrix(ex.audio);
    Var states = encoder_.forward_states(tape, mel);
    if (ex.targets.rows() != states.rows() ||
        ex.targets.cols() != encoder_.config().target_dim) {
      throw DataError("distillation targets are " + std::to_string(ex.targets.rows()) +
                      "x" + std::to_string(ex.targets.cols()) + ", encoder produced " +
                      std::to_string(states.rows()) + " tokens of target dim " +
                      std::to_string(encoder_.config().target_dim));
    }
    if (!encoder_.codebook().initialized()) {
      encoder_.codebook().kmeans_pp_init(states.value(), rng_);
    }
    seen.push_back(states.value());
    Var proj = encoder_.distill_projection(tape, states);
    Var distill = ag::mse(proj, tape.constant(ex.targets));
    distill_total += distill.value()(0, 0);
    VqOutput vq = vq_forward(tape, states, encoder_.codebook());
    encoder_.codebook().record_usage(vq.indices, step_);
    terms.push_back(distill);
    terms.push_back(ag::scale(vq.commitment, beta));
    terms.push_back(vq.codebook);
  }
  Eigen::Index rows = 0;
  for (const Tensor& st : seen) rows += st.rows();
  last_states_.resize(rows, encoder_.config().dim);
  Eigen::Index r = 0;
  for (const Tensor& st : seen) {
    last_states_.middleRows(r, st.rows()) = st;
    r += st.rows();
  }
  if (distill_only) *distill_only = distill_total / static_cast<double>(batch.size());
  Var total = ag::sum(ag::concat_rows(terms));
  return ag::scale(total, 1.0 / static_cast<double>(batch.size()));
}

double DistillTrainer::train_step(const std::vector<DistillExample>& batch) {
  ++step_;
  optimizer_.zero_grad();
  Tape tape;
  Var l = loss(tape, batch);
  tape.backward(l);
  optimizer_.step();
  // Dead codewords are re-seeded from this batch's encoder states.
  encoder_.codebook().reseed_dead(last_states_, step_, rng_);
  return l.value()(0, 0);
}

double DistillTrainer::evaluate(const std::vector<DistillExample>& batch) {
  Tape tape;
  return loss(tape, batch).value()(0, 0);
}

}  // namespace streamanon
