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

#ifndef STREAMANON_LAYERS_HPP_
#define STREAMANON_LAYERS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "streamanon/autograd.hpp"

namespace streamanon {

using Rng = std::mt19937_64;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) scaled by `gain`.
Tensor init_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in,
                    Rng& rng, double gain = 1.0);

// Every layer exposes its parameters for checkpointing and optimization.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual void collect(std::vector<Parameter*>& out) = 0;
  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    collect(out);
    return out;
  }
};

class Linear : public Layer {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out, bool bias, Rng& rng,
         double init_gain = 1.0);

  Var forward(Tape& tape, Var x);
  RowVec step(const RowVec& x) const;
  void collect(std::vector<Parameter*>& out) override;

  int in_dim() const { return static_cast<int>(weight_.value.rows()); }
  int out_dim() const { return static_cast<int>(weight_.value.cols()); }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
  bool has_bias_ = false;
};

class RmsNorm : public Layer {
 public:
  RmsNorm() = default;
  RmsNorm(const std::string& name, int dim);

  Var forward(Tape& tape, Var x);
  RowVec step(const RowVec& x) const;
  void collect(std::vector<Parameter*>& out) override;

 private:
  Parameter gain_;
};

// Gated feed-forward: (silu(x Wg) * (x Wu)) Wd.
class SwiGlu : public Layer {
 public:
  SwiGlu() = default;
  SwiGlu(const std::string& name, int dim, int hidden, Rng& rng);

  Var forward(Tape& tape, Var x);
  RowVec step(const RowVec& x) const;
  void collect(std::vector<Parameter*>& out) override;

 private:
  Linear gate_, up_, down_;
};

// Per-layer key/value rows for every processed position.
struct KvCache {
  Tensor keys;
  Tensor values;
  int length = 0;
};

class CausalSelfAttention : public Layer {
 public:
  CausalSelfAttention() = default;
  CausalSelfAttention(const std::string& name, int dim, int heads, Rng& rng,
                      double rope_base = 10000.0);

  Var forward(Tape& tape, Var x, int seq_len);
  // Processes position `cache.length`; appends its key/value.
  RowVec step(const RowVec& x, KvCache& cache) const;
  void collect(std::vector<Parameter*>& out) override;

  int heads() const { return heads_; }

 private:
  Linear wq_, wk_, wv_, wo_;
  int heads_ = 1;
  double rope_base_ = 10000.0;
};

// Pre-norm decoder block.
class TransformerBlock : public Layer {
 public:
  TransformerBlock() = default;
  TransformerBlock(const std::string& name, int dim, int ffn_dim, int heads,
                   Rng& rng);

  Var forward(Tape& tape, Var x, int seq_len);
  RowVec step(const RowVec& x, KvCache& cache) const;
  void collect(std::vector<Parameter*>& out) override;

 private:
  RmsNorm attn_norm_, ffn_norm_;
  CausalSelfAttention attn_;
  SwiGlu ffn_;
};

struct TransformerCache {
  std::vector<KvCache> layers;
  int position = 0;
};

// Decoder-only stack with a final norm.
class Transformer : public Layer {
 public:
  Transformer() = default;
  Transformer(const std::string& name, int layers, int dim, int ffn_dim,
              int heads, Rng& rng);

  Var forward(Tape& tape, Var x, int seq_len);
  RowVec step(const RowVec& x, TransformerCache& cache) const;
  TransformerCache make_cache() const;
  void collect(std::vector<Parameter*>& out) override;

  int num_layers() const { return static_cast<int>(blocks_.size()); }

 private:
  std::vector<TransformerBlock> blocks_;
  RmsNorm final_norm_;
};

// Sliding history of the last (kernel - 1) inputs of a causal convolution.
struct ConvState {
  Tensor history;  // (kernel - 1) x in_channels, zero at stream start
  std::int64_t seen = 0;
};

// Dense causal 1-D convolution over time with optional stride. With stride
// s, an output is produced after every s-th input and covers the newest
// `kernel` inputs (zero-padded before the stream start).
class CausalConv1d : public Layer {
 public:
  CausalConv1d() = default;
  CausalConv1d(const std::string& name, int in, int out, int kernel,
               int stride, Rng& rng);

  // x: blocks of seq_len rows. Output: blocks of seq_len / stride rows.
  Var forward(Tape& tape, Var x, int seq_len);
  std::optional<RowVec> step(const RowVec& x, ConvState& state) const;
  ConvState make_state() const;
  void collect(std::vector<Parameter*>& out) override;

  int kernel() const { return kernel_; }
  int stride() const { return stride_; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  int in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1;
  Parameter weight_;  // (kernel * in) x out, oldest tap first
  Parameter bias_;
};

class DepthwiseCausalConv : public Layer {
 public:
  DepthwiseCausalConv() = default;
  DepthwiseCausalConv(const std::string& name, int channels, int kernel,
                      Rng& rng);

  Var forward(Tape& tape, Var x, int seq_len);
  RowVec step(const RowVec& x, ConvState& state) const;
  ConvState make_state() const;
  void collect(std::vector<Parameter*>& out) override;

 private:
  int channels_ = 0, kernel_ = 1;
  Parameter weight_;  // kernel x channels
  Parameter bias_;
};

// ConvNeXt-style residual block with causal depthwise mixing:
// x + ffn(norm(dwconv(x))).
class CausalConvNextBlock : public Layer {
 public:
  CausalConvNextBlock() = default;
  CausalConvNextBlock(const std::string& name, int dim, int ffn_dim,
                      int kernel, Rng& rng);

  Var forward(Tape& tape, Var x, int seq_len);
  RowVec step(const RowVec& x, ConvState& state) const;
  ConvState make_state() const { return dwconv_.make_state(); }
  void collect(std::vector<Parameter*>& out) override;

 private:
  DepthwiseCausalConv dwconv_;
  RmsNorm norm_;
  SwiGlu ffn_;
};

// Lookup table; forward is a row gather.
class Embedding : public Layer {
 public:
  Embedding() = default;
  Embedding(const std::string& name, int vocab, int dim, Rng& rng);

  Var forward(Tape& tape, const std::vector<int>& ids);
  RowVec row(int id) const;
  void collect(std::vector<Parameter*>& out) override;

  int vocab() const { return static_cast<int>(table_.value.rows()); }

 private:
  Parameter table_;
};

}  // namespace streamanon

#endif  // STREAMANON_LAYERS_HPP_
