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

#ifndef STREAMANON_CLI_HPP_
#define STREAMANON_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>

#include "streamanon/acoustic_codec.hpp"
#include "streamanon/arvc.hpp"
#include "streamanon/config.hpp"
#include "streamanon/content_encoder.hpp"
#include "streamanon/speaker.hpp"

namespace streamanon {

// The three trained models plus the (fixed) speaker embedder, stored as one
// checkpoint with sections content_encoder, acoustic_codec and arvc.
struct ModelBundle {
  std::unique_ptr<ContentEncoder> content;
  std::unique_ptr<AcousticCodec> codec;
  std::unique_ptr<ArvcModel> arvc;
  std::unique_ptr<SpeakerEmbedder> embedder;

  void save(const std::filesystem::path& path) const;
  static ModelBundle load(const std::filesystem::path& path);
};

struct TrainToyOptions {
  KeyValueConfig model_config;  // content_encoder.*, acoustic_codec.*, arvc.*, speaker.*
  int content_steps = 200;
  int codec_steps = 300;
  int arvc_steps = 300;
  double learning_rate = 3e-3;
  // The codec starts from a warm start over this many toy clips and then
  // fine-tunes at its own, smaller rate.
  int codec_warmup_clips = 512;
  double codec_learning_rate = 1e-4;
  std::uint64_t seed = 0;
};

// Distills the content encoder, trains the codec, then trains the converter
// on toy utterances (source == target) with the first two frozen.
ModelBundle train_toy(const TrainToyOptions& options, std::ostream& log);

// Subcommands: make-toy-data, pool-build, train-toy, precompute-contexts,
// anonymize, bench, eval {eer,wer,uar}. Returns the process exit code.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace streamanon

#endif  // STREAMANON_CLI_HPP_
