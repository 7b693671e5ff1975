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

#include "streamanon/optim.hpp"

#include <cmath>

namespace streamanon {

AdamW::AdamW(std::vector<Parameter*> params, AdamWOptions options)
    : params_(std::move(params)), options_(options), lr_(options.lr) {
  for (Parameter* p : params_) {
    m_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::zero_grad() {
  for (Parameter* p : params_) p->grad.setZero();
}

double AdamW::step() {
  double sq = 0.0;
  for (Parameter* p : params_) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  const double clip = (options_.clip_norm > 0.0 && norm > options_.clip_norm)
                          ? options_.clip_norm / norm
                          : 1.0;
  ++steps_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    const Tensor g = p.grad * clip;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseAbs2();
    if (options_.weight_decay > 0.0) {
      p.value *= (1.0 - lr_ * options_.weight_decay);
    }
    p.value.array() -= lr_ * (m_[i].array() / bc1) /
                       ((v_[i].array() / bc2).sqrt() + options_.eps);
  }
  lr_ *= options_.lr_decay;
  return norm;
}

}  // namespace streamanon
