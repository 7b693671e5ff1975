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

#include "streamanon/acoustic_codec.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/SVD>

namespace streamanon {
namespace {

constexpr char kSection[] = "acoustic_codec";
constexpr int kSpectralWindows[] = {128, 256, 512};

struct StftBasis {
  Tensor cos, sin;
};

const StftBasis& stft_basis(int window) {
  static std::mutex mu;
  static std::map<int, StftBasis> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(window);
  if (it != cache.end()) return it->second;
  const int bins = window / 2 + 1;
  StftBasis b{Tensor(window, bins), Tensor(window, bins)};
  const double norm = 1.0 / std::sqrt(static_cast<double>(window));
  for (int n = 0; n < window; ++n) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window);
    for (int k = 0; k < bins; ++k) {
      const double a = 2.0 * std::numbers::pi * k * n / window;
      b.cos(n, k) = w * std::cos(a) * norm;
      b.sin(n, k) = -w * std::sin(a) * norm;
    }
  }
  return cache.emplace(window, std::move(b)).first->second;
}

}  // namespace

void AcousticCodecConfig::write(KeyValueConfig& kv) const {
  const std::string p = std::string(kSection) + ".";
  kv.set(p + "dim", std::to_string(dim));
  kv.set(p + "codebooks", std::to_string(codebooks));
  kv.set(p + "codebook_size", std::to_string(codebook_size));
  kv.set(p + "kernel", std::to_string(kernel));
  kv.set(p + "commitment_beta", std::to_string(commitment_beta));
  kv.set(p + "spectral_weight", std::to_string(spectral_weight));
  kv.set(p + "seed", std::to_string(seed));
}

AcousticCodecConfig AcousticCodecConfig::read(const KeyValueConfig& kv) {
  const std::string p = std::string(kSection) + ".";
  AcousticCodecConfig c;
  c.dim = kv.get_int(p + "dim", c.dim);
  c.codebooks = kv.get_int(p + "codebooks", c.codebooks);
  c.codebook_size = kv.get_int(p + "codebook_size", c.codebook_size);
  c.kernel = kv.get_int(p + "kernel", c.kernel);
  c.commitment_beta = kv.get_double(p + "commitment_beta", c.commitment_beta);
  c.spectral_weight = kv.get_double(p + "spectral_weight", c.spectral_weight);
  c.seed = static_cast<std::uint64_t>(kv.get_int(p + "seed", static_cast<int>(c.seed)));
  return c;
}

RvqResult rvq_quantize(const RowVec& latent, std::span<const Codebook> stages) {
  if (stages.empty()) throw ConfigError("rvq_quantize: no stages");
  RvqResult out;
  out.residual = latent;
  for (const Codebook& cb : stages) {
    const Quantized q = cb.quantize(out.residual);
    out.codes.push_back(q.index);
    out.residual -= q.codeword;
  }
  return out;
}

AcousticCodec::AcousticCodec(const AcousticCodecConfig& config)
    : config_(config),
      rng_(config.seed),
      enc_in_("codec.enc_in", kFrameSamples, config.dim, true, rng_),
      enc_conv_("codec.enc_conv", config.dim, config.dim, config.kernel, 1, rng_),
      dec_conv_("codec.dec_conv", config.dim, config.dim, config.kernel, 1, rng_),
      dec_out_("codec.dec_out", config.dim, kFrameSamples, true, rng_) {
  if (config.codebooks < 1) throw ConfigError("acoustic codec needs >= 1 codebook");
  stages_.reserve(config.codebooks);
  for (int k = 0; k < config.codebooks; ++k) {
    stages_.emplace_back("codec.rvq" + std::to_string(k), config.codebook_size,
                         config.dim, rng_);
  }
}

CodecState AcousticCodec::make_state() const {
  CodecState s;
  s.encoder = enc_conv_.make_state();
  s.decoder = dec_conv_.make_state();
  return s;
}

RowVec AcousticCodec::encode_frame(const RowVec& samples, ConvState& state) const {
  const RowVec h = enc_in_.step(samples);
  return h + *enc_conv_.step(h, state);
}

std::vector<AcousticFrame> AcousticCodec::encode_frames(const AudioChunk& audio,
                                                        CodecState& state) const {
  if (audio.sample_rate != kSampleRate) {
    throw ConfigError("acoustic codec expects " + std::to_string(kSampleRate) + " Hz");
  }
  ++encode_calls_;
  std::vector<AcousticFrame> out;
  RowVec frame(kFrameSamples);
  for (float s : audio.samples) {
    state.carry.push_back(s);
    if (static_cast<int>(state.carry.size()) < kFrameSamples) continue;
    for (int i = 0; i < kFrameSamples; ++i) frame(i) = state.carry[i];
    state.carry.clear();
    const RowVec latent = encode_frame(frame, state.encoder);
    out.push_back(AcousticFrame{rvq_quantize(latent, stages_).codes});
    ++state.frames_encoded;
  }
  return out;
}

RowVec AcousticCodec::dequantize(const AcousticFrame& frame) const {
  if (frame.codes.size() != stages_.size()) {
    throw DataError("acoustic frame has " + std::to_string(frame.codes.size()) +
                    " codes, codec has " + std::to_string(stages_.size()) + " stages");
  }
  RowVec sum = RowVec::Zero(config_.dim);
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const int c = frame.codes[k];
    if (c < 0 || c >= stages_[k].size()) {
      throw DataError("acoustic code " + std::to_string(c) + " out of range for stage " +
                      std::to_string(k));
    }
    sum += stages_[k].table().row(c);
  }
  return sum;
}

AudioChunk AcousticCodec::decode_frames(std::span<const AcousticFrame> frames,
                                        CodecState& state) const {
  AudioChunk out;
  out.samples.reserve(frames.size() * kFrameSamples);
  for (const AcousticFrame& f : frames) {
    const RowVec q = dequantize(f);
    const RowVec h = q + *dec_conv_.step(q, state.decoder);
    const RowVec wave = dec_out_.step(h);
    for (Eigen::Index i = 0; i < wave.size(); ++i) {
      out.samples.push_back(static_cast<float>(wave(i)));
    }
    ++state.frames_decoded;
  }
  return out;
}

void AcousticCodec::warm_start(const Tensor& frames, Rng& rng, int kmeans_iterations) {
  if (frames.cols() != kFrameSamples) throw ShapeError("warm_start: expected 2048-sample rows");
  if (frames.rows() < config_.dim) {
    throw DataError("warm_start needs at least " + std::to_string(config_.dim) +
                    " frames, got " + std::to_string(frames.rows()));
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(frames, Eigen::ComputeThinV);
  const Eigen::MatrixXd basis = svd.matrixV().leftCols(config_.dim);
  enc_in_.weight().value = basis;
  enc_in_.bias().value.setZero();
  dec_out_.weight().value = basis.transpose();
  dec_out_.bias().value.setZero();
  for (CausalConv1d* conv : {&enc_conv_, &dec_conv_}) {
    conv->weight().value.setZero();
    conv->bias().value.setZero();
  }
  Tensor residual = frames * basis;
  for (Codebook& cb : stages_) {
    cb.kmeans_pp_init(residual, rng);
    cb.kmeans_refine(residual, kmeans_iterations);
    const std::vector<int> idx = cb.quantize_rows(residual);
    for (Eigen::Index r = 0; r < residual.rows(); ++r) residual.row(r) -= cb.table().row(idx[r]);
  }
}

std::vector<AcousticFrame> AcousticCodec::encode_utterance(const AudioChunk& audio) const {
  CodecState state = make_state();
  return encode_frames(audio, state);
}

AudioChunk AcousticCodec::decode_utterance(std::span<const AcousticFrame> frames) const {
  CodecState state = make_state();
  return decode_frames(frames, state);
}

Var AcousticCodec::encode_latents(Tape& tape, const Tensor& frames) {
  const int n = static_cast<int>(frames.rows());
  Var h = enc_in_.forward(tape, tape.constant(frames));
  return ag::add(h, enc_conv_.forward(tape, h, n));
}

Var AcousticCodec::decode_latents(Tape& tape, Var latents) {
  const int n = static_cast<int>(latents.rows());
  Var h = ag::add(latents, dec_conv_.forward(tape, latents, n));
  return dec_out_.forward(tape, h);
}

void AcousticCodec::collect(std::vector<Parameter*>& out) {
  enc_in_.collect(out);
  enc_conv_.collect(out);
  dec_conv_.collect(out);
  dec_out_.collect(out);
  for (auto& s : stages_) s.collect(out);
}

std::uint64_t AcousticCodec::checksum() const {
  return parameter_checksum(const_cast<AcousticCodec*>(this)->parameters());
}

void AcousticCodec::save(Checkpoint& ck) const {
  config_.write(ck.config);
  ck.put(kSection, const_cast<AcousticCodec*>(this)->parameters());
}

std::unique_ptr<AcousticCodec> AcousticCodec::load(const Checkpoint& ck) {
  if (!ck.has_section(kSection)) throw DataError("checkpoint has no acoustic_codec section");
  auto codec = std::make_unique<AcousticCodec>(AcousticCodecConfig::read(ck.config));
  ck.get(kSection, codec->parameters());
  return codec;
}

Tensor frame_matrix(const AudioChunk& audio) {
  const Eigen::Index n = static_cast<Eigen::Index>(audio.samples.size()) / kFrameSamples;
  Tensor m(n, kFrameSamples);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = audio.samples[i];
  return m;
}

Var stft_magnitude(Tape& tape, Var samples_column, int window, int hop) {
  const int length = static_cast<int>(samples_column.rows());
  if (samples_column.cols() != 1 || length < window) {
    throw ShapeError("stft_magnitude: need a column of at least one window");
  }
  const int frames = (length - window) / hop + 1;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(frames) * window);
  for (int f = 0; f < frames; ++f) {
    for (int n = 0; n < window; ++n) idx.push_back(f * hop + n);
  }
  Var framed = ag::reshape(ag::gather_rows(samples_column, std::move(idx)), frames, window);
  const StftBasis& basis = stft_basis(window);
  Var re = ag::matmul(framed, tape.constant(basis.cos));
  Var im = ag::matmul(framed, tape.constant(basis.sin));
  return ag::magnitude(re, im);
}

double snr_db(std::span<const float> reference, std::span<const float> estimate) {
  if (reference.size() != estimate.size()) throw ShapeError("snr_db: length mismatch");
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    signal += static_cast<double>(reference[i]) * reference[i];
    const double e = static_cast<double>(reference[i]) - estimate[i];
    noise += e * e;
  }
  return 10.0 * std::log10(signal / std::max(noise, 1e-20));
}

// --- CodecTrainer ---------------------------------------------------------

CodecTrainer::CodecTrainer(AcousticCodec& codec, AdamWOptions options,
                           std::uint64_t seed)
    : codec_(codec), optimizer_(codec.parameters(), options), rng_(seed) {}

Var CodecTrainer::loss(Tape& tape, const std::vector<AudioChunk>& batch,
                       CodecLossBreakdown* parts) {
  if (batch.empty()) throw DataError("codec batch is empty");
  const auto& cfg = codec_.config();
  auto& stages = codec_.stages();
  stage_inputs_.assign(stages.size(), Tensor());
  std::vector<Var> time_terms, spec_terms, vq_terms;
  for (const AudioChunk& clip : batch) {
    const Tensor frames = frame_matrix(clip);
    if (frames.rows() < 1) throw DataError("codec training clip shorter than one frame");
    const Eigen::Index n = frames.rows();
    Var latent = codec_.encode_latents(tape, frames);

    Tensor residual = latent.value();
    Tensor total = Tensor::Zero(n, cfg.dim);
    for (std::size_t k = 0; k < stages.size(); ++k) {
      if (!stages[k].initialized()) stages[k].kmeans_pp_init(residual, rng_);
      Tensor& seen = stage_inputs_[k];
      seen.conservativeResize(seen.rows() + n, cfg.dim);
      seen.bottomRows(n) = residual;
      const auto idx = stages[k].quantize_rows(residual);
      stages[k].record_usage(idx, step_);
      Var q = ag::gather_rows(tape.param(stages[k].codewords()), idx);
      vq_terms.push_back(ag::scale(ag::mse(tape.constant(residual), q), cfg.dim));
      residual -= q.value();
      total += q.value();
    }
    vq_terms.push_back(ag::scale(ag::mse(latent, tape.constant(total)),
                                 cfg.dim * cfg.commitment_beta));
    Var decoded = codec_.decode_latents(tape, ag::straight_through(latent, total));
    time_terms.push_back(ag::l1(decoded, tape.constant(frames)));

    Var wave = ag::reshape(decoded, n * kFrameSamples, 1);
    Var target = tape.constant(Eigen::Map<const Tensor>(frames.data(), n * kFrameSamples, 1));
    for (int w : kSpectralWindows) {
      spec_terms.push_back(ag::l1(stft_magnitude(tape, wave, w, w / 4),
                                  stft_magnitude(tape, target, w, w / 4)));
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Var time_l1 = ag::scale(ag::sum(ag::concat_rows(time_terms)), inv_b);
  Var spectral = ag::scale(ag::sum(ag::concat_rows(spec_terms)),
                           inv_b / std::size(kSpectralWindows));
  Var vq = ag::scale(ag::sum(ag::concat_rows(vq_terms)), inv_b);
  Var total = ag::add(ag::add(time_l1, ag::scale(spectral, cfg.spectral_weight)), vq);
  if (parts) {
    parts->time_l1 = time_l1.value()(0, 0);
    parts->spectral = spectral.value()(0, 0);
    parts->vq = vq.value()(0, 0);
    parts->total = total.value()(0, 0);
  }
  return total;
}

double CodecTrainer::train_step(const std::vector<AudioChunk>& batch) {
  ++step_;
  optimizer_.zero_grad();
  Tape tape;
  Var l = loss(tape, batch);
  tape.backward(l);
  optimizer_.step();
  auto& stages = codec_.stages();
  for (std::size_t k = 0; k < stages.size(); ++k) {
    stages[k].reseed_dead(stage_inputs_[k], step_, rng_);
  }
  return l.value()(0, 0);
}

CodecLossBreakdown CodecTrainer::evaluate(const std::vector<AudioChunk>& batch) {
  CodecLossBreakdown parts;
  Tape tape;
  loss(tape, batch, &parts);
  return parts;
}

}  // namespace streamanon
