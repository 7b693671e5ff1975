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

#include "streamanon/autograd.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace streamanon {

const Tensor& Var::value() const { return tape_->value(*this); }
Tensor& Var::grad() const { return tape_->grad(*this); }

Var Tape::constant(Tensor value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(Tensor value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = true;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  Node& n = nodes_.emplace_back();
  n.borrowed = &p.value;
  n.requires_grad = true;
  n.param = &p;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward fn) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw StateError("op mixes vars from different tapes");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(fn);
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tensor& Tape::value(Var v) const { return nodes_[v.id()].value(); }

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id()];
  if (!n.has_grad) {
    n.grad = Tensor::Zero(n.value().rows(), n.value().cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw StateError("backward on a foreign var");
  if (value(loss).size() != 1) {
    throw ShapeError("backward expects a scalar loss, got " +
                     std::to_string(value(loss).rows()) + "x" +
                     std::to_string(value(loss).cols()));
  }
  grad(loss)(0, 0) += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param) n.param->grad += n.grad;
  }
}

// ---------------------------------------------------------------------------

void rope_rotate_row(double* row, int width, int heads, int position,
                     double base, double direction) {
  const int head_dim = width / heads;
  for (int h = 0; h < heads; ++h) {
    double* x = row + h * head_dim;
    for (int i = 0; i < head_dim / 2; ++i) {
      const double theta =
          position * std::pow(base, -2.0 * i / static_cast<double>(head_dim));
      const double c = std::cos(theta);
      const double s = direction * std::sin(theta);
      const double x0 = x[2 * i];
      const double x1 = x[2 * i + 1];
      x[2 * i] = x0 * c - x1 * s;
      x[2 * i + 1] = x0 * s + x1 * c;
    }
  }
}

void silu_inplace(RowVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = v(i) / (1.0 + std::exp(-v(i)));
  }
}

RowVec rms_normalize(const RowVec& x, const RowVec& gain, double eps) {
  const double r = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()) + eps);
  return (x / r).cwiseProduct(gain);
}

namespace ag {
namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

void check_row(const Tensor& a, const Tensor& row, const char* op) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError(std::string(op) + ": expected a 1x" +
                     std::to_string(a.cols()) + " row");
  }
}

Tensor scalar(double v) {
  Tensor t(1, 1);
  t(0, 0) = v;
  return t;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dims " + std::to_string(av.cols()) +
                     " vs " + std::to_string(bv.rows()));
  }
  return t.record(av * bv, {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) t.grad(a).noalias() += g * t.value(b).transpose();
    if (t.requires_grad(b)) t.grad(b).noalias() += t.value(a).transpose() * g;
  });
}

Var add(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "add");
  return a.tape()->record(a.value() + b.value(), {a, b},
                          [a, b](Tape& t, const Tensor& g) {
                            if (t.requires_grad(a)) t.grad(a) += g;
                            if (t.requires_grad(b)) t.grad(b) += g;
                          });
}

Var sub(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "sub");
  return a.tape()->record(a.value() - b.value(), {a, b},
                          [a, b](Tape& t, const Tensor& g) {
                            if (t.requires_grad(a)) t.grad(a) += g;
                            if (t.requires_grad(b)) t.grad(b) -= g;
                          });
}

Var mul(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "mul");
  return a.tape()->record(
      a.value().cwiseProduct(b.value()), {a, b},
      [a, b](Tape& t, const Tensor& g) {
        if (t.requires_grad(a)) t.grad(a) += g.cwiseProduct(t.value(b));
        if (t.requires_grad(b)) t.grad(b) += g.cwiseProduct(t.value(a));
      });
}

Var scale(Var a, double s) {
  return a.tape()->record(a.value() * s, {a}, [a, s](Tape& t, const Tensor& g) {
    t.grad(a) += g * s;
  });
}

Var add_row(Var a, Var row) {
  check_row(a.value(), row.value(), "add_row");
  Tensor out = a.value().rowwise() + row.value().row(0);
  return a.tape()->record(std::move(out), {a, row},
                          [a, row](Tape& t, const Tensor& g) {
                            if (t.requires_grad(a)) t.grad(a) += g;
                            if (t.requires_grad(row)) {
                              t.grad(row) += g.colwise().sum();
                            }
                          });
}

Var mul_row(Var a, Var row) {
  check_row(a.value(), row.value(), "mul_row");
  Tensor out = a.value().array().rowwise() * row.value().row(0).array();
  return a.tape()->record(
      std::move(out), {a, row}, [a, row](Tape& t, const Tensor& g) {
        if (t.requires_grad(a)) {
          t.grad(a).array() += g.array().rowwise() * t.value(row).row(0).array();
        }
        if (t.requires_grad(row)) {
          t.grad(row) += g.cwiseProduct(t.value(a)).colwise().sum();
        }
      });
}

Var silu(Var a) {
  const Tensor& x = a.value();
  Tensor sig = (1.0 + (-x.array()).exp()).inverse().matrix();
  Tensor out = x.cwiseProduct(sig);
  return a.tape()->record(
      std::move(out), {a},
      [a, sig = std::move(sig)](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        t.grad(a).array() +=
            g.array() * sig.array() * (1.0 + x.array() * (1.0 - sig.array()));
      });
}

Var rms_norm(Var x, Var gain, double eps) {
  check_row(x.value(), gain.value(), "rms_norm");
  const Tensor& xv = x.value();
  const Eigen::Index d = xv.cols();
  Eigen::VectorXd inv_r(xv.rows());
  Tensor normed(xv.rows(), d);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    inv_r(r) = 1.0 / std::sqrt(xv.row(r).squaredNorm() / static_cast<double>(d) + eps);
    normed.row(r) = xv.row(r) * inv_r(r);
  }
  Tensor out = normed.array().rowwise() * gain.value().row(0).array();
  return x.tape()->record(
      std::move(out), {x, gain},
      [x, gain, inv_r = std::move(inv_r), normed = std::move(normed)](
          Tape& t, const Tensor& g) {
        if (t.requires_grad(gain)) {
          t.grad(gain) += g.cwiseProduct(normed).colwise().sum();
        }
        if (t.requires_grad(x)) {
          const Tensor dn = g.array().rowwise() * t.value(gain).row(0).array();
          Tensor& gx = t.grad(x);
          const double dim = static_cast<double>(normed.cols());
          for (Eigen::Index r = 0; r < dn.rows(); ++r) {
            const double proj = dn.row(r).dot(normed.row(r)) / dim;
            gx.row(r) += (dn.row(r) - normed.row(r) * proj) * inv_r(r);
          }
        }
      });
}

Var rope(Var x, int heads, int seq_len, double base) {
  const Tensor& xv = x.value();
  if (heads <= 0 || xv.cols() % (2 * heads) != 0) {
    throw ShapeError("rope: width " + std::to_string(xv.cols()) +
                     " not divisible into " + std::to_string(heads) +
                     " even-sized heads");
  }
  Tensor out = xv;
  const int width = static_cast<int>(xv.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    rope_rotate_row(out.row(r).data(), width, heads,
                    static_cast<int>(r % seq_len), base);
  }
  return x.tape()->record(
      std::move(out), {x}, [x, heads, seq_len, base, width](Tape& t, const Tensor& g) {
        Tensor back = g;
        for (Eigen::Index r = 0; r < back.rows(); ++r) {
          rope_rotate_row(back.row(r).data(), width, heads,
                          static_cast<int>(r % seq_len), base, -1.0);
        }
        t.grad(x) += back;
      });
}

Var causal_attention(Var q, Var k, Var v, int heads, int seq_len) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  check_same_shape(qv, kv, "causal_attention(q,k)");
  check_same_shape(qv, vv, "causal_attention(q,v)");
  if (seq_len <= 0 || qv.rows() % seq_len != 0) {
    throw ShapeError("causal_attention: rows " + std::to_string(qv.rows()) +
                     " not a multiple of seq_len " + std::to_string(seq_len));
  }
  const Eigen::Index width = qv.cols();
  const int head_dim = static_cast<int>(width / heads);
  const double s = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Eigen::Index blocks = qv.rows() / seq_len;

  auto probs = std::make_shared<std::vector<Tensor>>(blocks * heads);
  Tensor out = Tensor::Zero(qv.rows(), width);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = qv.block(b * seq_len, h * head_dim, seq_len, head_dim);
      const auto kb = kv.block(b * seq_len, h * head_dim, seq_len, head_dim);
      const auto vb = vv.block(b * seq_len, h * head_dim, seq_len, head_dim);
      Tensor p = Tensor::Zero(seq_len, seq_len);
      for (int i = 0; i < seq_len; ++i) {
        RowVec scores = (kb.topRows(i + 1) * qb.row(i).transpose()).transpose() * s;
        const double m = scores.maxCoeff();
        scores = (scores.array() - m).exp();
        scores /= scores.sum();
        p.row(i).head(i + 1) = scores;
      }
      out.block(b * seq_len, h * head_dim, seq_len, head_dim) = p * vb;
      (*probs)[b * heads + h] = std::move(p);
    }
  }
  return q.tape()->record(
      std::move(out), {q, k, v},
      [q, k, v, heads, seq_len, head_dim, s, blocks, probs](Tape& t,
                                                           const Tensor& g) {
        const Tensor& qv = t.value(q);
        const Tensor& kv = t.value(k);
        const Tensor& vv = t.value(v);
        const bool gq = t.requires_grad(q);
        const bool gk = t.requires_grad(k);
        const bool gv = t.requires_grad(v);
        for (Eigen::Index b = 0; b < blocks; ++b) {
          for (int h = 0; h < heads; ++h) {
            const Tensor& p = (*probs)[b * heads + h];
            const auto go = g.block(b * seq_len, h * head_dim, seq_len, head_dim);
            const auto qb = qv.block(b * seq_len, h * head_dim, seq_len, head_dim);
            const auto kb = kv.block(b * seq_len, h * head_dim, seq_len, head_dim);
            const auto vb = vv.block(b * seq_len, h * head_dim, seq_len, head_dim);
            if (gv) {
              t.grad(v).block(b * seq_len, h * head_dim, seq_len, head_dim) +=
                  p.transpose() * go;
            }
            if (!gq && !gk) continue;
            const Tensor dp = go * vb.transpose();
            Tensor ds(seq_len, seq_len);
            for (int i = 0; i < seq_len; ++i) {
              const double dot = dp.row(i).dot(p.row(i));
              ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
            }
            if (gq) {
              t.grad(q).block(b * seq_len, h * head_dim, seq_len, head_dim) +=
                  ds * kb * s;
            }
            if (gk) {
              t.grad(k).block(b * seq_len, h * head_dim, seq_len, head_dim) +=
                  ds.transpose() * qb * s;
            }
          }
        }
      });
}

Var gather_rows(Var a, std::vector<int> indices) {
  const Tensor& av = a.value();
  Tensor out = Tensor::Zero(static_cast<Eigen::Index>(indices.size()), av.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int src = indices[i];
    if (src < -1 || src >= av.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(src) +
                       " out of range for " + std::to_string(av.rows()) + " rows");
    }
    if (src >= 0) out.row(static_cast<Eigen::Index>(i)) = av.row(src);
  }
  return a.tape()->record(
      std::move(out), {a},
      [a, idx = std::move(indices)](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          if (idx[i] >= 0) ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Tensor out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return parts[0].tape()->record(
      std::move(out), parts, [keep](Tape& t, const Tensor& g) {
        Eigen::Index r = 0;
        for (const Var& p : keep) {
          const Eigen::Index n = t.value(p).rows();
          if (t.requires_grad(p)) t.grad(p) += g.middleRows(r, n);
          r += n;
        }
      });
}

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  const Tensor& av = a.value();
  if (rows * cols != av.size()) throw ShapeError("reshape: element count changes");
  Tensor out = Eigen::Map<const Tensor>(av.data(), rows, cols);
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad(a);
    Eigen::Map<Tensor>(ga.data(), g.rows(), g.cols()) += g;
  });
}

Var depthwise_causal_conv(Var x, Var weight, int seq_len) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  if (wv.cols() != xv.cols()) throw ShapeError("depthwise_causal_conv: channel mismatch");
  if (seq_len <= 0 || xv.rows() % seq_len != 0) {
    throw ShapeError("depthwise_causal_conv: rows not a multiple of seq_len");
  }
  const Eigen::Index kernel = wv.rows();
  Tensor out = Tensor::Zero(xv.rows(), xv.cols());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const Eigen::Index tpos = r % seq_len;
    for (Eigen::Index k = 0; k < kernel; ++k) {
      const Eigen::Index back = kernel - 1 - k;
      if (tpos - back < 0) continue;
      out.row(r) += xv.row(r - back).cwiseProduct(wv.row(k));
    }
  }
  return x.tape()->record(
      std::move(out), {x, weight},
      [x, weight, seq_len, kernel](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        const Tensor& wv = t.value(weight);
        const bool gx = t.requires_grad(x);
        const bool gw = t.requires_grad(weight);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          const Eigen::Index tpos = r % seq_len;
          for (Eigen::Index k = 0; k < kernel; ++k) {
            const Eigen::Index back = kernel - 1 - k;
            if (tpos - back < 0) continue;
            if (gx) t.grad(x).row(r - back) += g.row(r).cwiseProduct(wv.row(k));
            if (gw) t.grad(weight).row(k) += g.row(r).cwiseProduct(xv.row(r - back));
          }
        }
      });
}

Var cross_entropy(Var logits, std::vector<int> targets, Reduction reduction) {
  const Tensor& lv = logits.value();
  if (static_cast<Eigen::Index>(targets.size()) != lv.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(lv.rows()) + " rows");
  }
  Tensor probs(lv.rows(), lv.cols());
  double total = 0.0;
  int count = 0;
  for (Eigen::Index r = 0; r < lv.rows(); ++r) {
    const int y = targets[r];
    if (y < -1 || y >= lv.cols()) {
      throw ShapeError("cross_entropy: target " + std::to_string(y) +
                       " out of range");
    }
    const double m = lv.row(r).maxCoeff();
    const RowVec e = (lv.row(r).array() - m).exp();
    const double z = e.sum();
    probs.row(r) = e / z;
    if (y < 0) continue;
    total += std::log(z) + m - lv(r, y);
    ++count;
  }
  const double norm =
      reduction == Reduction::kMean ? 1.0 / std::max(count, 1) : 1.0;
  return logits.tape()->record(
      scalar(total * norm), {logits},
      [logits, probs = std::move(probs), tg = std::move(targets), norm](
          Tape& t, const Tensor& g) {
        Tensor& gl = t.grad(logits);
        const double scale = g(0, 0) * norm;
        for (Eigen::Index r = 0; r < probs.rows(); ++r) {
          if (tg[r] < 0) continue;
          gl.row(r) += probs.row(r) * scale;
          gl(r, tg[r]) -= scale;
        }
      });
}

Var mse(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "mse");
  const double n = static_cast<double>(a.value().size());
  Tensor diff = a.value() - b.value();
  const double loss = diff.squaredNorm() / n;
  return a.tape()->record(scalar(loss), {a, b},
                          [a, b, n, diff = std::move(diff)](Tape& t, const Tensor& g) {
                            const double c = 2.0 * g(0, 0) / n;
                            if (t.requires_grad(a)) t.grad(a) += diff * c;
                            if (t.requires_grad(b)) t.grad(b) -= diff * c;
                          });
}

Var l1(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "l1");
  const double n = static_cast<double>(a.value().size());
  Tensor diff = a.value() - b.value();
  const double loss = diff.cwiseAbs().sum() / n;
  return a.tape()->record(
      scalar(loss), {a, b}, [a, b, n, diff = std::move(diff)](Tape& t, const Tensor& g) {
        const Tensor sign = diff.unaryExpr(
            [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
        const double c = g(0, 0) / n;
        if (t.requires_grad(a)) t.grad(a) += sign * c;
        if (t.requires_grad(b)) t.grad(b) -= sign * c;
      });
}

Var magnitude(Var re, Var im, double eps) {
  check_same_shape(re.value(), im.value(), "magnitude");
  Tensor m = (re.value().array().square() + im.value().array().square() + eps)
                 .sqrt()
                 .matrix();
  Tensor copy = m;
  return re.tape()->record(
      std::move(m), {re, im}, [re, im, mag = std::move(copy)](Tape& t, const Tensor& g) {
        const Tensor scale = g.cwiseQuotient(mag);
        if (t.requires_grad(re)) t.grad(re) += scale.cwiseProduct(t.value(re));
        if (t.requires_grad(im)) t.grad(im) += scale.cwiseProduct(t.value(im));
      });
}

Var sum(Var a) {
  return a.tape()->record(scalar(a.value().sum()), {a},
                          [a](Tape& t, const Tensor& g) {
                            t.grad(a).array() += g(0, 0);
                          });
}

Var straight_through(Var x, const Tensor& quantized) {
  check_same_shape(x.value(), quantized, "straight_through");
  return x.tape()->record(quantized, {x}, [x](Tape& t, const Tensor& g) {
    t.grad(x) += g;
  });
}

}  // namespace ag
}  // namespace streamanon
