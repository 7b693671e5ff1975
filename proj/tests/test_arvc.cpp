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

#include <cmath>

#include "streamanon/arvc.hpp"
#include "streamanon/speaker.hpp"
#include "streamanon/toy_data.hpp"
#include "suites.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

using testing::random_row;
using testing::tiny_arvc_config;

std::vector<AcousticFrame> frames_of(int t, int n) {
  std::vector<AcousticFrame> out(t);
  for (int i = 0; i < t; ++i) out[i].codes.assign(n, i % 5);
  return out;
}

TEST(Interleave, DelayTwoLayout) {
  const auto seq = build_interleaved(RowVec::Ones(4), {1, 2, 3}, frames_of(3, 2), 2);
  EXPECT_EQ(describe_slots(seq.slots), "g c0 w c1 w c2 a0 eoc a1 eoc a2");
}

TEST(Interleave, UndelayedLayout) {
  EXPECT_EQ(describe_slots(interleaved_slots(3, 0)), "g c0 a0 c1 a1 c2 a2");
}

TEST(Interleave, EmptyUtteranceIsSpeakerOnly) {
  EXPECT_EQ(describe_slots(interleaved_slots(0, 3)), "g");
}

TEST(Interleave, PromptPairsPrecedeTheSource) {
  EXPECT_EQ(describe_slots(interleaved_slots(1, 1, 2)), "g pc0 pa0 pc1 pa1 c0 w eoc a0");
}

TEST(Interleave, ShortUtteranceFlushesEveryFrame) {
  EXPECT_EQ(describe_slots(interleaved_slots(2, 5)), "g c0 w c1 w eoc a0 eoc a1");
}

TEST(Interleave, ValidatesInputs) {
  EXPECT_THROW(build_interleaved(RowVec::Ones(4), {1, 2}, frames_of(3, 2), 1), DataError);
  EXPECT_THROW(interleaved_slots(3, 9), ConfigError);
  EXPECT_THROW(interleaved_slots(3, -1), ConfigError);
  auto slots = interleaved_slots(4, 2);
  EXPECT_TRUE(is_valid_interleaving(slots, 2));
  std::swap(slots[1], slots[2]);
  EXPECT_FALSE(is_valid_interleaving(slots, 2));
}

TEST(Interleave, EveryFrameAppearsOnceInOrder) {
  for (int t = 0; t <= 12; ++t) {
    for (int d = 0; d <= kMaxDelay; ++d) {
      int next_c = 0, next_a = 0;
      for (const Slot& s : interleaved_slots(t, d)) {
        if (s.kind == SlotKind::kContent) {
          EXPECT_EQ(s.index, next_c++);
        }
        if (s.kind == SlotKind::kAcoustic) {
          EXPECT_EQ(s.index, next_a++);
          // Frame a_j is produced only after content c_{min(j+d, T-1)} is in.
          EXPECT_GE(next_c - 1, std::min(s.index + d, t - 1));
        }
      }
      EXPECT_EQ(next_c, t);
      EXPECT_EQ(next_a, t);
    }
  }
}

TEST(Delay, FixedAlwaysReturnsItsValue) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_delay(rng, {DelayMode::kFixed, 4}), 4);
  EXPECT_THROW(sample_delay(rng, {DelayMode::kFixed, 9}), ConfigError);
}

TEST(Delay, DynamicIsUniformOverOneToEight) {
  for (double f : suites::delay_frequencies(8000, 2)) {
    EXPECT_GE(f, 0.10);
    EXPECT_LE(f, 0.15);
  }
}

TEST(Delay, DynamicIsReproducible) {
  Rng a(3), b(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_delay(a, DelaySchedule{}), sample_delay(b, DelaySchedule{}));
  }
}

TEST(ArLoss, UniformLogitsGiveClosedForm) {
  const int t = 5, n = 3, v = 11;
  std::vector<Tensor> logits(n, Tensor::Zero(t, v));
  EXPECT_NEAR(ar_loss(logits, frames_of(t, n)), t * n * std::log(11.0), 1e-9);
}

TEST(ArLoss, LargeMarginDrivesLossToZero) {
  const auto targets = frames_of(4, 2);
  double previous = 1e300;
  for (double margin : {1.0, 5.0, 20.0, 50.0}) {
    std::vector<Tensor> logits(2, Tensor::Zero(4, 6));
    for (int k = 0; k < 2; ++k) {
      for (int r = 0; r < 4; ++r) logits[k](r, targets[r].codes[k]) = margin;
    }
    const double l = ar_loss(logits, targets);
    EXPECT_LT(l, previous);
    previous = l;
  }
  EXPECT_LT(previous, 1e-19);
}

TEST(ArLoss, MatchesScalarLoopOracle) { EXPECT_LE(suites::ar_loss_oracle_max_diff(50, 4), 1e-6); }

class GenSessionTest : public ::testing::Test {
 protected:
  GenSessionTest() : model_(tiny_arvc_config()) {
    Rng rng(5);
    speaker_ = unit_normalize(random_row(8, rng));
  }
  ArvcModel model_;
  RowVec speaker_;
};

TEST_F(GenSessionTest, DelayTwoEmitsFromTheThirdToken) {
  GenSession s(model_, speaker_, {}, {}, 2);
  EXPECT_FALSE(s.step(1).has_value());
  EXPECT_FALSE(s.step(2).has_value());
  const auto f = s.step(3);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->codes.size(), 3u);
}

TEST_F(GenSessionTest, FlushConservesFrames) {
  GenSession s(model_, speaker_, {}, {}, 2);
  int emitted = 0;
  for (int c : {1, 2, 3, 4, 5}) emitted += s.step(c).has_value();
  EXPECT_EQ(emitted, 3);
  EXPECT_EQ(s.flush().size(), 2u);
  EXPECT_EQ(s.emitted(), s.consumed());

  GenSession one(model_, speaker_, {}, {}, 1);
  EXPECT_FALSE(one.step(7).has_value());
  EXPECT_EQ(one.flush().size(), 1u);
}

TEST_F(GenSessionTest, RandomLengthsConserve) {
  EXPECT_EQ(suites::flush_conservation_failures(100, 6), 0);
}

TEST_F(GenSessionTest, ClosedSessionRejectsInput) {
  GenSession s(model_, speaker_, {}, {}, 1);
  s.flush();
  EXPECT_TRUE(s.closed());
  EXPECT_THROW(s.step(1), StateError);
  EXPECT_THROW(s.flush(), StateError);
}

TEST_F(GenSessionTest, RejectsBadTokensAndDelay) {
  GenSession s(model_, speaker_, {}, {}, 1);
  EXPECT_THROW(s.step(16), DataError);
  EXPECT_THROW(s.step(-1), DataError);
  EXPECT_THROW(GenSession(model_, speaker_, {}, {}, 9), ConfigError);
  EXPECT_THROW(GenSession(model_, RowVec::Ones(5), {}, {}, 1), DataError);
}

TEST_F(GenSessionTest, GreedyIsDeterministic) {
  auto run = [&] {
    GenSession s(model_, speaker_, {1, 2}, frames_of(2, 3), 3);
    std::vector<AcousticFrame> out;
    for (int c : {3, 1, 4, 1, 5, 9, 2, 6}) {
      if (auto f = s.step(c)) out.push_back(*f);
    }
    for (auto& f : s.flush()) out.push_back(f);
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST_F(GenSessionTest, SampledDecodingIsSeeded) {
  DecodeOptions opt;
  opt.greedy = false;
  opt.seed = 42;
  auto run = [&](std::uint64_t seed) {
    opt.seed = seed;
    GenSession s(model_, speaker_, {}, {}, 1, opt);
    std::vector<AcousticFrame> out;
    for (int c = 0; c < 12; ++c) {
      if (auto f = s.step(c)) out.push_back(*f);
    }
    return out;
  };
  EXPECT_EQ(run(1), run(1));
  EXPECT_NE(run(1), run(2));
}

TEST_F(GenSessionTest, TraceIsAValidInterleaving) {
  GenSession s(model_, speaker_, {1}, frames_of(1, 3), 3);
  for (int c : {1, 2, 3, 4, 5}) s.step(c);
  s.flush();
  EXPECT_TRUE(is_valid_interleaving(s.trace(), 3));
}

TEST(ArvcFidelity, IncrementalMatchesTeacherForced) {
  const auto r = suites::incremental_fidelity({1, 2, 4, 8}, 7);
  EXPECT_LE(r.slow_max_rel, 1e-5);
  EXPECT_LE(r.fast_max_rel, 1e-5);
  EXPECT_LE(r.session_max_rel, 1e-5);
}

TEST(ArvcCausality, FutureContentDoesNotReachEarlierFrames) {
  const auto r = suites::arvc_causality(10, 8);
  EXPECT_GT(r.compared, 0);
  EXPECT_EQ(r.violations, 0);
}

TEST(ArvcTraining, InitialLossIsNearUniform) {
  ArvcConfig cfg = tiny_arvc_config();
  ArvcModel model(cfg);
  const CopyTask task{cfg.content_vocab, cfg.codebooks, cfg.acoustic_vocab, cfg.speaker_dim, 9};
  Rng rng(10);
  ArvcTrainer trainer(model);
  const auto m = trainer.evaluate(task.batch(rng, 4, 10), 2);
  const double baseline = cfg.codebooks * std::log(static_cast<double>(cfg.acoustic_vocab));
  EXPECT_NEAR(m.loss_per_frame, baseline, 0.05 * baseline);
  EXPECT_EQ(m.frames, 40);
}

TEST(ArvcTraining, FrozenModelsStayUnchanged) {
  auto p = suites::make_tiny_pipeline(11);
  const auto content_sum = p.content->checksum();
  const auto codec_sum = p.codec->checksum();
  ArvcConfig cfg = tiny_arvc_config();
  const CopyTask task{cfg.content_vocab, cfg.codebooks, cfg.acoustic_vocab, cfg.speaker_dim, 12};
  ArvcTrainer trainer(*p.arvc, {p.content.get(), p.codec.get()});
  Rng rng(13);
  const auto batch = task.batch(rng, 2, 6);
  for (int i = 0; i < 100; ++i) trainer.train_step(batch, DelaySchedule{});
  EXPECT_EQ(p.content->checksum(), content_sum);
  EXPECT_EQ(p.codec->checksum(), codec_sum);
  EXPECT_NO_THROW(trainer.verify_frozen());
  // Touching a frozen weight is detected on the next step.
  p.codec->parameters()[0]->value(0, 0) += 1.0;
  EXPECT_THROW(trainer.train_step(batch, DelaySchedule{}), StateError);
}

TEST(ArvcTraining, LossFallsOnCopyTask) {
  ArvcConfig cfg = tiny_arvc_config();
  ArvcModel model(cfg);
  const CopyTask task{cfg.content_vocab, cfg.codebooks, cfg.acoustic_vocab, cfg.speaker_dim, 14};
  AdamWOptions opt;
  opt.lr = 3e-3;
  ArvcTrainer trainer(model, {}, opt);
  Rng rng(15);
  const auto batch = task.batch(rng, 4, 8);
  const double first = trainer.train_step(batch, DelaySchedule{});
  double last = first;
  for (int i = 0; i < 60; ++i) last = trainer.train_step(batch, DelaySchedule{});
  EXPECT_LT(last, 0.8 * first);
}

TEST(ArvcModel, CheckpointRoundTrip) {
  ArvcConfig cfg = tiny_arvc_config();
  cfg.schedule = {DelayMode::kFixed, 3};
  ArvcModel model(cfg);
  Checkpoint ck;
  model.save(ck);
  const auto back = ArvcModel::load(Checkpoint::deserialize(ck.serialize()));
  EXPECT_EQ(back->checksum(), model.checksum());
  EXPECT_EQ(back->config().schedule.mode, DelayMode::kFixed);
  EXPECT_EQ(back->config().schedule.delay, 3);
}

}  // namespace
}  // namespace streamanon
