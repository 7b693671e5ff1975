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

#include "streamanon/vq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace streamanon {

Codebook::Codebook(const std::string& name, int size, int dim, Rng& rng)
    : codewords_(name + ".codewords", init_uniform(size, dim, dim, rng)),
      last_used_(static_cast<std::size_t>(size), 0) {
  if (size < 1 || dim < 1) {
    throw ConfigError(name + ": codebook needs at least one codeword");
  }
}

Quantized Codebook::quantize(const RowVec& x) const {
  const Tensor& cb = codewords_.value;
  if (cb.rows() == 0) throw ConfigError("quantize: empty codebook");
  if (x.size() != cb.cols()) {
    throw ShapeError("quantize: vector dim " + std::to_string(x.size()) +
                     " != codebook dim " + std::to_string(cb.cols()));
  }
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cb.rows(); ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < cb.cols(); ++j) {
      const double diff = x(j) - cb(i, j);
      d += diff * diff;
    }
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  return {best, cb.row(best)};
}

std::vector<int> Codebook::quantize_rows(const Tensor& x) const {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = quantize(x.row(r)).index;
  return out;
}

void Codebook::kmeans_refine(const Tensor& data, int iterations) {
  if (data.cols() != dim()) throw ShapeError("kmeans_refine: dim mismatch");
  Tensor& cb = codewords_.value;
  for (int it = 0; it < iterations; ++it) {
    const std::vector<int> idx = quantize_rows(data);
    Tensor sum = Tensor::Zero(cb.rows(), cb.cols());
    std::vector<int> count(static_cast<std::size_t>(cb.rows()), 0);
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      sum.row(idx[r]) += data.row(r);
      ++count[idx[r]];
    }
    for (Eigen::Index k = 0; k < cb.rows(); ++k) {
      if (count[k] > 0) cb.row(k) = sum.row(k) / static_cast<double>(count[k]);
    }
  }
}

void Codebook::kmeans_pp_init(const Tensor& data, Rng& rng) {
  Tensor& cb = codewords_.value;
  if (data.rows() == 0) throw DataError("kmeans_pp_init: empty data");
  if (data.cols() != cb.cols()) throw ShapeError("kmeans_pp_init: dim mismatch");
  const Eigen::Index n = data.rows();
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  int filled = 0;
  auto absorb = [&](const RowVec& c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      dist(r) = std::min(dist(r), (data.row(r) - c).squaredNorm());
    }
  };
  cb.row(0) = data.row(pick(rng));
  absorb(cb.row(0));
  filled = 1;
  while (filled < cb.rows()) {
    const double total = dist.sum();
    if (!(total > 0.0)) break;
    double u = unit(rng) * total;
    Eigen::Index chosen = n - 1;
    for (Eigen::Index r = 0; r < n; ++r) {
      u -= dist(r);
      if (u <= 0.0) {
        chosen = r;
        break;
      }
    }
    cb.row(filled) = data.row(chosen);
    absorb(cb.row(filled));
    ++filled;
  }
  const double spread =
      std::sqrt((data.rowwise() - data.colwise().mean()).squaredNorm() /
                static_cast<double>(data.size())) + 1e-8;
  std::normal_distribution<double> jitter(0.0, 0.05 * spread);
  for (Eigen::Index i = filled; i < cb.rows(); ++i) {
    cb.row(i) = data.row(pick(rng));
    for (Eigen::Index j = 0; j < cb.cols(); ++j) cb(i, j) += jitter(rng);
  }
  initialized_ = true;
}

void Codebook::record_usage(const std::vector<int>& indices, long step) {
  if (last_used_.size() != static_cast<std::size_t>(size())) {
    last_used_.assign(static_cast<std::size_t>(size()), step);
  }
  for (int i : indices) last_used_[static_cast<std::size_t>(i)] = step;
}

int Codebook::reseed_dead(const Tensor& batch, long step, Rng& rng, long patience) {
  if (batch.rows() == 0) return 0;
  if (last_used_.size() != static_cast<std::size_t>(size())) {
    last_used_.assign(static_cast<std::size_t>(size()), step);
  }
  std::uniform_int_distribution<Eigen::Index> pick(0, batch.rows() - 1);
  std::normal_distribution<double> jitter(0.0, 1e-3);
  int replaced = 0;
  for (int i = 0; i < size(); ++i) {
    if (step - last_used_[i] <= patience) continue;
    codewords_.value.row(i) = batch.row(pick(rng));
    for (Eigen::Index j = 0; j < codewords_.value.cols(); ++j) {
      codewords_.value(i, j) += jitter(rng);
    }
    last_used_[i] = step;
    ++replaced;
  }
  return replaced;
}

VqLosses vq_losses(const RowVec& x, const RowVec& codeword) {
  if (x.size() != codeword.size()) throw ShapeError("vq_losses: shape mismatch");
  const double d = (x - codeword).squaredNorm();
  return {d, d};
}

VqOutput vq_forward(Tape& tape, Var x, Codebook& codebook) {
  VqOutput out;
  out.indices = codebook.quantize_rows(x.value());
  Var q = ag::gather_rows(tape.param(codebook.codewords()), out.indices);
  const double dim = static_cast<double>(x.cols());
  out.commitment = ag::scale(ag::mse(x, tape.constant(q.value())), dim);
  out.codebook = ag::scale(ag::mse(tape.constant(x.value()), q), dim);
  out.quantized = ag::straight_through(x, q.value());
  return out;
}

}  // namespace streamanon
