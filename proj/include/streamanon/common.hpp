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

#ifndef STREAMANON_COMMON_HPP_
#define STREAMANON_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace streamanon {

// Dense row-major matrix used for all activations and parameters. Rows are
// time steps (or batch*time), columns are features.
using Tensor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline constexpr int kSampleRate = 44100;
inline constexpr int kWindowLength = 2048;
inline constexpr int kHopLength = 512;
inline constexpr int kMelBins = 160;
inline constexpr int kDownsample = 4;
// Samples covered by one content token / one acoustic frame.
inline constexpr int kFrameSamples = kHopLength * kDownsample;
inline constexpr double kFrameMs = 1000.0 * kFrameSamples / kSampleRate;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: sample rate, dimensions, out-of-range knobs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, lengths, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor shape or dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace streamanon

#endif  // STREAMANON_COMMON_HPP_
