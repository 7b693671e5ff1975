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

#ifndef STREAMANON_AUTOGRAD_HPP_
#define STREAMANON_AUTOGRAD_HPP_

#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "streamanon/common.hpp"

namespace streamanon {

// A named trainable tensor. `grad` is accumulated by Tape::backward and
// cleared by the optimizer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)),
        grad(Tensor::Zero(value.rows(), value.cols())) {}
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  // Gradient buffer (allocated zero on first access).
  Tensor& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
// iteration is a valid topological order for backpropagation.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  // Borrows p.value; on backward the node gradient is added to p.grad.
  Var param(Parameter& p);

  // Records an op output. The backward closure runs only when at least one
  // input requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward fn);
  Var record(Tensor value, std::span<const Var> inputs, Backward fn);

  void backward(Var loss);

  const Tensor& value(Var v) const;
  Tensor& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;

    const Tensor& value() const { return borrowed ? *borrowed : owned; }
  };

  std::deque<Node> nodes_;
};

enum class Reduction { kSum, kMean };

// Differentiable ops. All inputs must live on the same tape.
namespace ag {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
// Adds a 1xC row to every row of a.
Var add_row(Var a, Var row);
// Multiplies every row of a elementwise by a 1xC row.
Var mul_row(Var a, Var row);
Var silu(Var a);
Var rms_norm(Var x, Var gain, double eps = 1e-6);
// Rotary position encoding over `heads` interleaved pairs; the position of
// row r is r % seq_len.
Var rope(Var x, int heads, int seq_len, double base);
// Multi-head causal attention applied independently to consecutive blocks
// of `seq_len` rows.
Var causal_attention(Var q, Var k, Var v, int heads, int seq_len);
// Row gather; index -1 yields a zero row.
Var gather_rows(Var a, std::vector<int> indices);
Var concat_rows(std::span<const Var> parts);
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);
// Depthwise causal convolution, weights K x C, blocks of seq_len rows,
// zero history at each block start.
Var depthwise_causal_conv(Var x, Var weight, int seq_len);
// Softmax cross-entropy against class indices; index -1 is ignored.
Var cross_entropy(Var logits, std::vector<int> targets,
                  Reduction reduction = Reduction::kSum);
Var mse(Var a, Var b);
Var l1(Var a, Var b);
// sqrt(re^2 + im^2 + eps), elementwise.
Var magnitude(Var re, Var im, double eps = 1e-9);
Var sum(Var a);
// Forward value is `quantized`; the gradient flows to x unchanged.
Var straight_through(Var x, const Tensor& quantized);

}  // namespace ag

// Shared helpers used by both the tape ops and incremental decoders.
void rope_rotate_row(double* row, int width, int heads, int position,
                     double base, double direction = 1.0);
void silu_inplace(RowVec& v);
RowVec rms_normalize(const RowVec& x, const RowVec& gain, double eps = 1e-6);

}  // namespace streamanon

#endif  // STREAMANON_AUTOGRAD_HPP_
