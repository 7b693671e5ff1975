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

#ifndef STREAMANON_VQ_HPP_
#define STREAMANON_VQ_HPP_

#include <string>
#include <vector>

#include "streamanon/layers.hpp"

namespace streamanon {

struct Quantized {
  int index = 0;
  RowVec codeword;
};

// Learned codebook with nearest-neighbour lookup.
class Codebook : public Layer {
 public:
  Codebook() = default;
  Codebook(const std::string& name, int size, int dim, Rng& rng);

  // Squared-Euclidean nearest codeword; ties resolve to the lowest index.
  Quantized quantize(const RowVec& x) const;
  std::vector<int> quantize_rows(const Tensor& x) const;

  // k-means++ seeding from `data` rows. When there are fewer distinct rows
  // than codewords the remainder are jittered copies of sampled rows.
  void kmeans_pp_init(const Tensor& data, Rng& rng);
  // Lloyd iterations over `data`; codewords with no assigned rows stay put.
  void kmeans_refine(const Tensor& data, int iterations);

  void record_usage(const std::vector<int>& indices, long step);
  // Replaces codewords unused for more than `patience` steps with random
  // rows of `batch`. Returns the number replaced.
  int reseed_dead(const Tensor& batch, long step, Rng& rng, long patience = 200);

  void collect(std::vector<Parameter*>& out) override { out.push_back(&codewords_); }

  int size() const { return static_cast<int>(codewords_.value.rows()); }
  int dim() const { return static_cast<int>(codewords_.value.cols()); }
  const Tensor& table() const { return codewords_.value; }
  Parameter& codewords() { return codewords_; }
  bool initialized() const { return initialized_; }

 private:
  Parameter codewords_;
  std::vector<long> last_used_;
  bool initialized_ = false;
};

struct VqLosses {
  double commitment = 0.0;
  double codebook = 0.0;
};

// Plain-value losses for one vector: commitment = |x - sg(c)|^2,
// codebook = |sg(x) - c|^2.
VqLosses vq_losses(const RowVec& x, const RowVec& codeword);

struct VqOutput {
  Var quantized;   // straight-through: value = codewords, gradient -> x
  Var commitment;  // mean over rows of |x - sg(c)|^2
  Var codebook;    // mean over rows of |sg(x) - c|^2
  std::vector<int> indices;
};

VqOutput vq_forward(Tape& tape, Var x, Codebook& codebook);

}  // namespace streamanon

#endif  // STREAMANON_VQ_HPP_
