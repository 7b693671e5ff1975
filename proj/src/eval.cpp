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

#include "streamanon/eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "streamanon/common.hpp"

namespace streamanon {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

EerResult eer(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.impostor.empty()) {
    throw DataError("EER needs non-empty genuine and impostor score sets");
  }
  std::vector<double> gen = scores.genuine, imp = scores.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> all(gen);
  all.insert(all.end(), imp.begin(), imp.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> thresholds{all.front() - 1.0};
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    thresholds.push_back(0.5 * (all[i] + all[i + 1]));
  }
  thresholds.push_back(all.back() + 1.0);

  const auto ng = static_cast<long long>(gen.size());
  const auto ni = static_cast<long long>(imp.size());
  long long prev_fa = 0, prev_fr = 0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double th = thresholds[i];
    const long long fa = imp.end() - std::lower_bound(imp.begin(), imp.end(), th);
    const long long fr = std::lower_bound(gen.begin(), gen.end(), th) - gen.begin();
    // FAR - FRR compared exactly in integers.
    const long long diff = fa * ng - fr * ni;
    if (diff == 0) return {static_cast<double>(fa) / ni, th};
    if (diff < 0) {
      // i > 0: at the lowest threshold every trial is accepted, so FAR - FRR = 1.
      const double far0 = static_cast<double>(prev_fa) / ni;
      const double frr0 = static_cast<double>(prev_fr) / ng;
      const double far1 = static_cast<double>(fa) / ni;
      const double frr1 = static_cast<double>(fr) / ng;
      const double d0 = far0 - frr0, d1 = far1 - frr1;
      const double t = d0 / (d0 - d1);
      return {far0 + t * (far1 - far0), thresholds[i - 1] + t * (th - thresholds[i - 1])};
    }
    prev_fa = fa;
    prev_fr = fr;
  }
  throw StateError("EER sweep found no crossing");
}

std::size_t edit_distance(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp) {
  std::vector<std::size_t> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[hyp.size()];
}

double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  if (ref.empty()) throw DataError("WER needs a non-empty reference");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

CorpusWer corpus_wer(const std::vector<std::string>& ref_lines,
                     const std::vector<std::string>& hyp_lines) {
  if (ref_lines.size() != hyp_lines.size()) {
    throw DataError("reference has " + std::to_string(ref_lines.size()) +
                    " lines, hypothesis has " + std::to_string(hyp_lines.size()));
  }
  CorpusWer out;
  for (std::size_t i = 0; i < ref_lines.size(); ++i) {
    const auto ref = split_words(ref_lines[i]);
    out.edits += edit_distance(ref, split_words(hyp_lines[i]));
    out.ref_words += ref.size();
  }
  out.utterances = ref_lines.size();
  if (out.ref_words == 0) throw DataError("WER needs a non-empty reference");
  out.rate = static_cast<double>(out.edits) / static_cast<double>(out.ref_words);
  return out;
}

double uar(const ConfusionMatrix& cm) {
  if (cm.empty()) throw DataError("empty confusion matrix");
  double total = 0.0;
  for (std::size_t r = 0; r < cm.size(); ++r) {
    if (cm[r].size() != cm.size()) throw DataError("confusion matrix must be square");
    double support = 0.0;
    for (double v : cm[r]) {
      if (v < 0.0) throw DataError("confusion matrix has negative counts");
      support += v;
    }
    if (support <= 0.0) throw DataError("class " + std::to_string(r) + " has zero support");
    total += cm[r][r] / support;
  }
  return total / static_cast<double>(cm.size());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

ScoreSet read_score_csv(const std::filesystem::path& path) {
  ScoreSet set;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (f.size() != 3) throw DataError(where + ": expected trial_id,label,score");
    double score = 0.0;
    if (!parse_double(f[2], score)) {
      if (set.genuine.empty() && set.impostor.empty() && f[2] == "score") continue;
      throw DataError(where + ": bad score '" + f[2] + "'");
    }
    if (f[1] == "target") {
      set.genuine.push_back(score);
    } else if (f[1] == "nontarget") {
      set.impostor.push_back(score);
    } else {
      throw DataError(where + ": label must be target or nontarget");
    }
  }
  return set;
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path) {
  ConfusionMatrix cm;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : split_csv(line)) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (cm.empty()) continue;  // header
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": non-numeric entry");
    }
    cm.push_back(std::move(row));
  }
  return cm;
}

}  // namespace streamanon
