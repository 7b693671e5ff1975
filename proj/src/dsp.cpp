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

#include "streamanon/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace streamanon {
namespace {

void check_rate(const AudioChunk& chunk) {
  if (chunk.sample_rate != kSampleRate) {
    throw ConfigError("expected sample rate " + std::to_string(kSampleRate) +
                      " Hz, got " + std::to_string(chunk.sample_rate));
  }
}

const std::vector<double>& hann_window() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kWindowLength);
    for (int n = 0; n < kWindowLength; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / kWindowLength);
    }
    return w;
  }();
  return window;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

double mel_center_hz(int k) {
  const double top = hz_to_mel(kSampleRate / 2.0);
  return mel_to_hz(top * (k + 1) / (kMelBins + 1));
}

const Tensor& mel_filterbank() {
  static const Tensor bank = [] {
    const int num_bins = kWindowLength / 2 + 1;
    const double top = hz_to_mel(kSampleRate / 2.0);
    std::vector<double> edges(kMelBins + 2);
    for (int i = 0; i < kMelBins + 2; ++i) {
      edges[i] = mel_to_hz(top * i / (kMelBins + 1));
    }
    Tensor fb = Tensor::Zero(kMelBins, num_bins);
    for (int m = 0; m < kMelBins; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      // Area normalization: each triangle integrates to one over Hz.
      const double height = 2.0 / (hi - lo);
      for (int b = 0; b < num_bins; ++b) {
        const double f = static_cast<double>(b) * kSampleRate / kWindowLength;
        double w = 0.0;
        if (f > lo && f <= mid) {
          w = (f - lo) / (mid - lo);
        } else if (f > mid && f < hi) {
          w = (hi - f) / (hi - mid);
        }
        fb(m, b) = w * height;
      }
    }
    return fb;
  }();
  return bank;
}

std::vector<double> power_spectrum(std::span<const double> frame) {
  const std::size_t n = frame.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ShapeError("power_spectrum needs a power-of-two length, got " +
                     std::to_string(n));
  }
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft_inplace(buf);
  std::vector<double> power(n / 2 + 1);
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = std::norm(buf[i]);
  return power;
}

std::vector<RawFrame> frame_stream(const AudioChunk& chunk,
                                   FrontendState& state) {
  check_rate(chunk);
  if (chunk.samples.empty()) {
    throw DataError("frame_stream: empty audio chunk");
  }
  std::vector<RawFrame> frames;
  const auto& in = chunk.samples;
  std::size_t pos = 0;
  while (pos < in.size()) {
    const std::size_t need = kHopLength - state.carry.size();
    const std::size_t take = std::min(need, in.size() - pos);
    state.carry.insert(state.carry.end(), in.begin() + pos,
                       in.begin() + pos + take);
    pos += take;
    if (static_cast<int>(state.carry.size()) < kHopLength) break;

    RawFrame frame;
    frame.reserve(kWindowLength);
    frame.insert(frame.end(), state.context.begin(), state.context.end());
    frame.insert(frame.end(), state.carry.begin(), state.carry.end());
    // Slide: the newest (window - hop) samples become the next context.
    std::copy(frame.end() - static_cast<std::ptrdiff_t>(state.context.size()),
              frame.end(), state.context.begin());
    state.carry.clear();
    ++state.frames_emitted;
    frames.push_back(std::move(frame));
  }
  return frames;
}

MelFrame logmel_frame(std::span<const float> frame) {
  if (frame.size() != static_cast<std::size_t>(kWindowLength)) {
    throw ShapeError("logmel_frame expects " + std::to_string(kWindowLength) +
                     " samples, got " + std::to_string(frame.size()));
  }
  const auto& window = hann_window();
  std::vector<double> windowed(kWindowLength);
  for (int i = 0; i < kWindowLength; ++i) {
    windowed[i] = static_cast<double>(frame[i]) * window[i];
  }
  const std::vector<double> power = power_spectrum(windowed);
  const Tensor& fb = mel_filterbank();
  const Eigen::Map<const Eigen::VectorXd> p(power.data(),
                                            static_cast<Eigen::Index>(power.size()));
  const Eigen::VectorXd energy = fb * p;
  MelFrame out;
  for (int m = 0; m < kMelBins; ++m) {
    out.bins[m] = std::log(std::max(energy(m), 1e-5));
  }
  return out;
}

std::vector<MelFrame> logmel_utterance(std::span<const float> samples) {
  std::vector<MelFrame> out;
  if (samples.empty()) return out;
  FrontendState state;
  AudioChunk chunk{std::vector<float>(samples.begin(), samples.end()),
                   kSampleRate};
  for (const auto& frame : frame_stream(chunk, state)) {
    out.push_back(logmel_frame(frame));
  }
  return out;
}

}  // namespace streamanon
