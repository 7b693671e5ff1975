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

#ifndef STREAMANON_WAV_HPP_
#define STREAMANON_WAV_HPP_

#include <filesystem>

#include "streamanon/dsp.hpp"

namespace streamanon {

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a mono RIFF/WAVE file (16-bit PCM or 32-bit IEEE float). Multi-channel
// files are rejected with DataError; the sample rate is reported as-is and
// checked by the consumers.
AudioChunk read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const AudioChunk& audio,
               WavEncoding encoding = WavEncoding::kPcm16);

// Duration from the header only, without decoding samples.
double wav_duration_seconds(const std::filesystem::path& path);

}  // namespace streamanon

#endif  // STREAMANON_WAV_HPP_
