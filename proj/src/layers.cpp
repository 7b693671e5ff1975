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

#include "streamanon/layers.hpp"

#include <cmath>
#include <string>

namespace streamanon {

Tensor init_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in,
                    Rng& rng, double gain) {
  const double bound = gain / std::sqrt(fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

// --- Linear ---------------------------------------------------------------

Linear::Linear(const std::string& name, int in, int out, bool bias, Rng& rng,
               double init_gain)
    : weight_(name + ".weight", init_uniform(in, out, in, rng, init_gain)),
      has_bias_(bias) {
  if (bias) bias_ = Parameter(name + ".bias", Tensor::Zero(1, out));
}

Var Linear::forward(Tape& tape, Var x) {
  Var y = ag::matmul(x, tape.param(weight_));
  if (has_bias_) y = ag::add_row(y, tape.param(bias_));
  return y;
}

RowVec Linear::step(const RowVec& x) const {
  if (x.size() != weight_.value.rows()) {
    throw ShapeError(weight_.name + ": input dim " + std::to_string(x.size()) +
                     " != " + std::to_string(weight_.value.rows()));
  }
  RowVec y = x * weight_.value;
  if (has_bias_) y += bias_.value.row(0);
  return y;
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

// --- RmsNorm --------------------------------------------------------------

RmsNorm::RmsNorm(const std::string& name, int dim)
    : gain_(name + ".gain", Tensor::Ones(1, dim)) {}

Var RmsNorm::forward(Tape& tape, Var x) {
  return ag::rms_norm(x, tape.param(gain_));
}

RowVec RmsNorm::step(const RowVec& x) const {
  return rms_normalize(x, gain_.value.row(0));
}

void RmsNorm::collect(std::vector<Parameter*>& out) { out.push_back(&gain_); }

// --- SwiGlu ---------------------------------------------------------------

SwiGlu::SwiGlu(const std::string& name, int dim, int hidden, Rng& rng)
    : gate_(name + ".gate", dim, hidden, false, rng),
      up_(name + ".up", dim, hidden, false, rng),
      down_(name + ".down", hidden, dim, false, rng) {}

Var SwiGlu::forward(Tape& tape, Var x) {
  Var h = ag::mul(ag::silu(gate_.forward(tape, x)), up_.forward(tape, x));
  return down_.forward(tape, h);
}

RowVec SwiGlu::step(const RowVec& x) const {
  RowVec g = gate_.step(x);
  silu_inplace(g);
  const RowVec h = g.cwiseProduct(up_.step(x));
  return down_.step(h);
}

void SwiGlu::collect(std::vector<Parameter*>& out) {
  gate_.collect(out);
  up_.collect(out);
  down_.collect(out);
}

// --- CausalSelfAttention --------------------------------------------------

CausalSelfAttention::CausalSelfAttention(const std::string& name, int dim,
                                         int heads, Rng& rng, double rope_base)
    : wq_(name + ".wq", dim, dim, false, rng),
      wk_(name + ".wk", dim, dim, false, rng),
      wv_(name + ".wv", dim, dim, false, rng),
      wo_(name + ".wo", dim, dim, false, rng),
      heads_(heads),
      rope_base_(rope_base) {
  if (heads <= 0 || dim % (2 * heads) != 0) {
    throw ConfigError(name + ": dim " + std::to_string(dim) +
                      " must split into " + std::to_string(heads) +
                      " even-width heads");
  }
}

Var CausalSelfAttention::forward(Tape& tape, Var x, int seq_len) {
  Var q = ag::rope(wq_.forward(tape, x), heads_, seq_len, rope_base_);
  Var k = ag::rope(wk_.forward(tape, x), heads_, seq_len, rope_base_);
  Var v = wv_.forward(tape, x);
  return wo_.forward(tape, ag::causal_attention(q, k, v, heads_, seq_len));
}

RowVec CausalSelfAttention::step(const RowVec& x, KvCache& cache) const {
  RowVec q = wq_.step(x);
  RowVec k = wk_.step(x);
  const RowVec v = wv_.step(x);
  const int width = static_cast<int>(q.size());
  const int pos = cache.length;
  rope_rotate_row(q.data(), width, heads_, pos, rope_base_);
  rope_rotate_row(k.data(), width, heads_, pos, rope_base_);

  if (cache.keys.cols() != width) {
    cache.keys.resize(16, width);
    cache.values.resize(16, width);
  }
  if (cache.length == cache.keys.rows()) {
    const Eigen::Index grown = std::max<Eigen::Index>(16, 2 * cache.keys.rows());
    cache.keys.conservativeResize(grown, Eigen::NoChange);
    cache.values.conservativeResize(grown, Eigen::NoChange);
  }
  cache.keys.row(pos) = k;
  cache.values.row(pos) = v;
  ++cache.length;

  const int head_dim = width / heads_;
  const double s = 1.0 / std::sqrt(static_cast<double>(head_dim));
  RowVec out(width);
  for (int h = 0; h < heads_; ++h) {
    const auto kb = cache.keys.block(0, h * head_dim, cache.length, head_dim);
    const auto vb = cache.values.block(0, h * head_dim, cache.length, head_dim);
    RowVec scores =
        (kb * q.segment(h * head_dim, head_dim).transpose()).transpose() * s;
    const double m = scores.maxCoeff();
    scores = (scores.array() - m).exp();
    scores /= scores.sum();
    out.segment(h * head_dim, head_dim) = scores * vb;
  }
  return wo_.step(out);
}

void CausalSelfAttention::collect(std::vector<Parameter*>& out) {
  wq_.collect(out);
  wk_.collect(out);
  wv_.collect(out);
  wo_.collect(out);
}

// --- TransformerBlock / Transformer ----------------------------------------

TransformerBlock::TransformerBlock(const std::string& name, int dim,
                                   int ffn_dim, int heads, Rng& rng)
    : attn_norm_(name + ".attn_norm", dim),
      ffn_norm_(name + ".ffn_norm", dim),
      attn_(name + ".attn", dim, heads, rng),
      ffn_(name + ".ffn", dim, ffn_dim, rng) {}

Var TransformerBlock::forward(Tape& tape, Var x, int seq_len) {
  Var h = ag::add(x, attn_.forward(tape, attn_norm_.forward(tape, x), seq_len));
  return ag::add(h, ffn_.forward(tape, ffn_norm_.forward(tape, h)));
}

RowVec TransformerBlock::step(const RowVec& x, KvCache& cache) const {
  const RowVec h = x + attn_.step(attn_norm_.step(x), cache);
  return h + ffn_.step(ffn_norm_.step(h));
}

void TransformerBlock::collect(std::vector<Parameter*>& out) {
  attn_norm_.collect(out);
  attn_.collect(out);
  ffn_norm_.collect(out);
  ffn_.collect(out);
}

Transformer::Transformer(const std::string& name, int layers, int dim,
                         int ffn_dim, int heads, Rng& rng)
    : final_norm_(name + ".final_norm", dim) {
  blocks_.reserve(layers);
  for (int i = 0; i < layers; ++i) {
    blocks_.emplace_back(name + ".layer" + std::to_string(i), dim, ffn_dim,
                         heads, rng);
  }
}

Var Transformer::forward(Tape& tape, Var x, int seq_len) {
  for (auto& block : blocks_) x = block.forward(tape, x, seq_len);
  return final_norm_.forward(tape, x);
}

RowVec Transformer::step(const RowVec& x, TransformerCache& cache) const {
  if (cache.layers.size() != blocks_.size()) {
    throw StateError("transformer cache has " +
                     std::to_string(cache.layers.size()) + " layers, model has " +
                     std::to_string(blocks_.size()));
  }
  RowVec h = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (cache.layers[i].length != cache.position) {
      throw StateError("transformer cache position mismatch");
    }
    h = blocks_[i].step(h, cache.layers[i]);
  }
  ++cache.position;
  return final_norm_.step(h);
}

TransformerCache Transformer::make_cache() const {
  TransformerCache cache;
  cache.layers.resize(blocks_.size());
  return cache;
}

void Transformer::collect(std::vector<Parameter*>& out) {
  for (auto& block : blocks_) block.collect(out);
  final_norm_.collect(out);
}

// --- CausalConv1d ---------------------------------------------------------

CausalConv1d::CausalConv1d(const std::string& name, int in, int out,
                           int kernel, int stride, Rng& rng)
    : in_(in),
      out_(out),
      kernel_(kernel),
      stride_(stride),
      weight_(name + ".weight",
              init_uniform(static_cast<Eigen::Index>(kernel) * in, out,
                           static_cast<double>(kernel) * in, rng)),
      bias_(name + ".bias", Tensor::Zero(1, out)) {
  if (kernel < 1 || stride < 1) throw ConfigError(name + ": bad kernel/stride");
}

Var CausalConv1d::forward(Tape& tape, Var x, int seq_len) {
  if (x.cols() != in_) throw ShapeError(weight_.name + ": channel mismatch");
  if (seq_len <= 0 || x.rows() % seq_len != 0) {
    throw ShapeError(weight_.name + ": rows not a multiple of seq_len");
  }
  const int blocks = static_cast<int>(x.rows() / seq_len);
  const int out_len = seq_len / stride_;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(blocks) * out_len * kernel_);
  for (int b = 0; b < blocks; ++b) {
    for (int o = 0; o < out_len; ++o) {
      const int last = (o + 1) * stride_ - 1;
      for (int k = 0; k < kernel_; ++k) {
        const int t = last - (kernel_ - 1) + k;
        idx.push_back(t < 0 ? -1 : b * seq_len + t);
      }
    }
  }
  Var cols = ag::reshape(ag::gather_rows(x, std::move(idx)),
                         static_cast<Eigen::Index>(blocks) * out_len,
                         static_cast<Eigen::Index>(kernel_) * in_);
  return ag::add_row(ag::matmul(cols, tape.param(weight_)), tape.param(bias_));
}

std::optional<RowVec> CausalConv1d::step(const RowVec& x, ConvState& state) const {
  if (x.size() != in_) throw ShapeError(weight_.name + ": channel mismatch");
  std::optional<RowVec> y;
  if ((state.seen + 1) % stride_ == 0) {
    RowVec window(static_cast<Eigen::Index>(kernel_) * in_);
    for (int k = 0; k < kernel_ - 1; ++k) {
      window.segment(static_cast<Eigen::Index>(k) * in_, in_) = state.history.row(k);
    }
    window.tail(in_) = x;
    y = RowVec(window * weight_.value + bias_.value.row(0));
  }
  if (kernel_ > 1) {
    for (int k = 0; k + 1 < kernel_ - 1; ++k) {
      state.history.row(k) = state.history.row(k + 1);
    }
    state.history.row(kernel_ - 2) = x;
  }
  ++state.seen;
  return y;
}

ConvState CausalConv1d::make_state() const {
  return ConvState{Tensor::Zero(kernel_ - 1, in_), 0};
}

void CausalConv1d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// --- DepthwiseCausalConv --------------------------------------------------

DepthwiseCausalConv::DepthwiseCausalConv(const std::string& name, int channels,
                                         int kernel, Rng& rng)
    : channels_(channels),
      kernel_(kernel),
      weight_(name + ".weight", init_uniform(kernel, channels, kernel, rng)),
      bias_(name + ".bias", Tensor::Zero(1, channels)) {}

Var DepthwiseCausalConv::forward(Tape& tape, Var x, int seq_len) {
  return ag::add_row(ag::depthwise_causal_conv(x, tape.param(weight_), seq_len),
                     tape.param(bias_));
}

RowVec DepthwiseCausalConv::step(const RowVec& x, ConvState& state) const {
  if (x.size() != channels_) throw ShapeError(weight_.name + ": channel mismatch");
  RowVec y = bias_.value.row(0);
  for (int k = 0; k < kernel_ - 1; ++k) {
    y += state.history.row(k).cwiseProduct(weight_.value.row(k));
  }
  y += x.cwiseProduct(weight_.value.row(kernel_ - 1));
  if (kernel_ > 1) {
    for (int k = 0; k + 1 < kernel_ - 1; ++k) {
      state.history.row(k) = state.history.row(k + 1);
    }
    state.history.row(kernel_ - 2) = x;
  }
  ++state.seen;
  return y;
}

ConvState DepthwiseCausalConv::make_state() const {
  return ConvState{Tensor::Zero(kernel_ - 1, channels_), 0};
}

void DepthwiseCausalConv::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// --- CausalConvNextBlock --------------------------------------------------

CausalConvNextBlock::CausalConvNextBlock(const std::string& name, int dim,
                                         int ffn_dim, int kernel, Rng& rng)
    : dwconv_(name + ".dwconv", dim, kernel, rng),
      norm_(name + ".norm", dim),
      ffn_(name + ".ffn", dim, ffn_dim, rng) {}

Var CausalConvNextBlock::forward(Tape& tape, Var x, int seq_len) {
  Var h = norm_.forward(tape, dwconv_.forward(tape, x, seq_len));
  return ag::add(x, ffn_.forward(tape, h));
}

RowVec CausalConvNextBlock::step(const RowVec& x, ConvState& state) const {
  return x + ffn_.step(norm_.step(dwconv_.step(x, state)));
}

void CausalConvNextBlock::collect(std::vector<Parameter*>& out) {
  dwconv_.collect(out);
  norm_.collect(out);
  ffn_.collect(out);
}

// --- Embedding ------------------------------------------------------------

Embedding::Embedding(const std::string& name, int vocab, int dim, Rng& rng)
    : table_(name + ".table", init_uniform(vocab, dim, 1.0, rng)) {}

Var Embedding::forward(Tape& tape, const std::vector<int>& ids) {
  return ag::gather_rows(tape.param(table_), ids);
}

RowVec Embedding::row(int id) const {
  if (id < 0 || id >= table_.value.rows()) {
    throw DataError(table_.name + ": id " + std::to_string(id) + " out of range");
  }
  return table_.value.row(id);
}

void Embedding::collect(std::vector<Parameter*>& out) { out.push_back(&table_); }

}  // namespace streamanon
