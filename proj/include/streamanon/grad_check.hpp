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

#ifndef STREAMANON_GRAD_CHECK_HPP_
#define STREAMANON_GRAD_CHECK_HPP_

#include <functional>
#include <span>
#include <vector>

#include "streamanon/autograd.hpp"

namespace streamanon {

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int checked = 0;
};

// Builds a scalar from the given input vars on a fresh tape.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

// Compares reverse-mode gradients with central finite differences for every
// element of every input. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           double epsilon = 1e-5, double floor = 1e-6);

// Same comparison for parameters of a model. `loss` must build the whole
// graph on the tape it receives. At most `max_per_param` entries of each
// parameter are probed (evenly strided) to bound runtime.
GradCheckResult grad_check_params(const std::function<Var(Tape&)>& loss,
                                  const std::vector<Parameter*>& params,
                                  double epsilon = 1e-5, double floor = 1e-6,
                                  int max_per_param = 24);

}  // namespace streamanon

#endif  // STREAMANON_GRAD_CHECK_HPP_
