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

#include <gtest/gtest.h>

#include <fstream>

#include "streamanon/eval.hpp"
#include "suites.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

TEST(Eer, PerfectlySeparated) { EXPECT_EQ(eer({{0.9, 0.8}, {0.1, 0.2}}).rate, 0.0); }

TEST(Eer, OneThird) {
  const auto r = eer({{0.9, 0.7, 0.3}, {0.8, 0.2, 0.1}});
  EXPECT_NEAR(r.rate, 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.threshold, 0.5);
}

TEST(Eer, IdenticalDistributionsAreChance) {
  EXPECT_NEAR(eer({{1, 2, 3, 4}, {1, 2, 3, 4}}).rate, 0.5, 1e-12);
}

TEST(Eer, FullyInverted) { EXPECT_NEAR(eer({{0.1}, {0.9}}).rate, 1.0, 1e-12); }

TEST(Eer, InterpolatesBetweenThresholds) {
  // No threshold equalizes the rates; the crossing is interpolated.
  const auto r = eer({{0.5, 0.9}, {0.1, 0.6, 0.7}});
  EXPECT_GT(r.rate, 0.0);
  EXPECT_LT(r.rate, 1.0);
  EXPECT_LE(suites::eer_oracle_max_diff(100, 3), 1e-12);
}

TEST(Eer, RejectsEmptySets) {
  EXPECT_THROW(eer({{}, {1.0}}), DataError);
  EXPECT_THROW(eer({{1.0}, {}}), DataError);
}

TEST(Wer, Basics) {
  EXPECT_EQ(wer({"a", "b"}, {"a", "b"}), 0.0);
  EXPECT_NEAR(wer(split_words("a b c"), split_words("a x c")), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(wer({"a"}, {}), 1.0);
  EXPECT_EQ(wer({"a"}, {"b", "c", "d"}), 3.0);
  EXPECT_THROW(wer({}, {"a"}), DataError);
}

TEST(Wer, MatchesRecursiveOracle) { EXPECT_EQ(suites::wer_oracle_mismatches(200, 4), 0); }

TEST(Wer, SplitWordsCollapsesWhitespace) {
  EXPECT_EQ(split_words("  the\tcat  sat \n"), (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_TRUE(split_words("   ").empty());
}

TEST(Wer, CorpusPoolsEdits) {
  const auto r = corpus_wer({"a b c", "d e"}, {"a x c", "d e f"});
  EXPECT_EQ(r.edits, 2u);
  EXPECT_EQ(r.ref_words, 5u);
  EXPECT_EQ(r.utterances, 2u);
  EXPECT_NEAR(r.rate, 0.4, 1e-15);
  EXPECT_THROW(corpus_wer({"a"}, {"a", "b"}), DataError);
}

TEST(Uar, Basics) {
  EXPECT_DOUBLE_EQ(uar({{5, 0}, {0, 3}}), 1.0);
  EXPECT_NEAR(uar({{8, 2}, {4, 6}}), 0.7, 1e-15);
  EXPECT_NEAR(uar({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), 1.0 / 3.0, 1e-15);
}

TEST(Uar, RejectsMalformedMatrices) {
  EXPECT_THROW(uar({}), DataError);
  EXPECT_THROW(uar({{1, 2}}), DataError);
  EXPECT_THROW(uar({{1, -1}, {0, 1}}), DataError);
  EXPECT_THROW(uar({{0, 0}, {0, 1}}), DataError);
}

TEST(Readers, ScoreCsv) {
  const auto dir = testing::scratch_dir("eval_csv");
  std::ofstream(dir / "s.csv") << "trial_id,label,score\nt1,target,0.9\nt2,nontarget,0.1\n"
                                  "t3,target,0.7\n";
  const ScoreSet s = read_score_csv(dir / "s.csv");
  EXPECT_EQ(s.genuine, (std::vector<double>{0.9, 0.7}));
  EXPECT_EQ(s.impostor, (std::vector<double>{0.1}));
  std::ofstream(dir / "bad.csv") << "t1,maybe,0.9\n";
  EXPECT_THROW(read_score_csv(dir / "bad.csv"), DataError);
  std::ofstream(dir / "bad2.csv") << "t1,target,high\n";
  EXPECT_THROW(read_score_csv(dir / "bad2.csv"), DataError);
  EXPECT_THROW(read_score_csv(dir / "missing.csv"), DataError);
}

TEST(Readers, ConfusionCsv) {
  const auto dir = testing::scratch_dir("eval_cm");
  std::ofstream(dir / "cm.csv") << "angry,sad\n8,2\n4,6\n";
  EXPECT_NEAR(uar(read_confusion_csv(dir / "cm.csv")), 0.7, 1e-15);
  std::ofstream(dir / "bad.csv") << "1,2\n3,x\n";
  EXPECT_THROW(read_confusion_csv(dir / "bad.csv"), DataError);
}

}  // namespace
}  // namespace streamanon
