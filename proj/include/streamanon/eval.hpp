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

#ifndef STREAMANON_EVAL_HPP_
#define STREAMANON_EVAL_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace streamanon {

// Higher score = more likely same speaker.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct EerResult {
  double rate = 0.0;
  double threshold = 0.0;
};

// Sweeps thresholds placed midway between adjacent distinct scores (plus one
// below and one above the range); a trial is accepted when score >= threshold.
// Returns the exact crossing of false-accept and false-reject rates or the
// linear interpolation between the two operating points around it.
EerResult eer(const ScoreSet& scores);

// Edit distance with unit substitution/insertion/deletion costs.
std::size_t edit_distance(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp);
double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);
std::vector<std::string> split_words(const std::string& text);

struct CorpusWer {
  double rate = 0.0;
  std::size_t edits = 0;
  std::size_t ref_words = 0;
  std::size_t utterances = 0;
};

// Line i of the hypothesis is scored against line i of the reference.
CorpusWer corpus_wer(const std::vector<std::string>& ref_lines,
                     const std::vector<std::string>& hyp_lines);

// rows = true class.
using ConfusionMatrix = std::vector<std::vector<double>>;

double uar(const ConfusionMatrix& cm);

// CSV of trial_id,label,score with label target|nontarget; optional header.
ScoreSet read_score_csv(const std::filesystem::path& path);
// Numeric CSV rows; a non-numeric first row is treated as a header.
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace streamanon

#endif  // STREAMANON_EVAL_HPP_
