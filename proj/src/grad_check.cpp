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

#include "streamanon/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace streamanon {
namespace {

void accumulate(GradCheckResult& r, double analytic, double numeric, double floor) {
  const double abs_err = std::abs(analytic - numeric);
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  r.max_abs_error = std::max(r.max_abs_error, abs_err);
  r.max_rel_error = std::max(r.max_rel_error, abs_err / denom);
  ++r.checked;
}

double evaluate(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  return fn(tape, vars).value()(0, 0);
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           double epsilon, double floor) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
    tape.backward(fn(tape, vars));
    for (const Var& v : vars) analytic.push_back(v.grad());
  }
  GradCheckResult result;
  std::vector<Tensor> probe = inputs;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (Eigen::Index j = 0; j < probe[i].size(); ++j) {
      const double orig = probe[i].data()[j];
      probe[i].data()[j] = orig + epsilon;
      const double up = evaluate(fn, probe);
      probe[i].data()[j] = orig - epsilon;
      const double down = evaluate(fn, probe);
      probe[i].data()[j] = orig;
      accumulate(result, analytic[i].data()[j], (up - down) / (2.0 * epsilon), floor);
    }
  }
  return result;
}

GradCheckResult grad_check_params(const std::function<Var(Tape&)>& loss,
                                  const std::vector<Parameter*>& params,
                                  double epsilon, double floor, int max_per_param) {
  for (Parameter* p : params) p->grad.setZero();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<Tensor> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad);

  auto eval = [&] {
    Tape tape;
    return loss(tape).value()(0, 0);
  };
  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& value = params[i]->value;
    const Eigen::Index n = value.size();
    const Eigen::Index stride =
        std::max<Eigen::Index>(1, n / std::max(1, max_per_param));
    for (Eigen::Index j = 0; j < n; j += stride) {
      const double orig = value.data()[j];
      value.data()[j] = orig + epsilon;
      const double up = eval();
      value.data()[j] = orig - epsilon;
      const double down = eval();
      value.data()[j] = orig;
      accumulate(result, analytic[i].data()[j], (up - down) / (2.0 * epsilon), floor);
    }
  }
  for (Parameter* p : params) p->grad.setZero();
  return result;
}

}  // namespace streamanon
