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

#ifndef STREAMANON_OPTIM_HPP_
#define STREAMANON_OPTIM_HPP_

#include <vector>

#include "streamanon/autograd.hpp"

namespace streamanon {

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  // Multiplied into the learning rate after every step.
  double lr_decay = 1.0;
  // <= 0 disables clipping.
  double clip_norm = 1.0;
};

class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, AdamWOptions options = {});

  void zero_grad();
  // Clips (if enabled) and applies one update. Returns the pre-clip norm.
  double step();
  double learning_rate() const { return lr_; }
  long steps() const { return steps_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_, v_;
  AdamWOptions options_;
  double lr_;
  long steps_ = 0;
};

}  // namespace streamanon

#endif  // STREAMANON_OPTIM_HPP_
