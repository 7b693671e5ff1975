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

#include "streamanon/content_encoder.hpp"
#include "streamanon/toy_data.hpp"
#include "suites.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

using testing::noise_audio;
using testing::slice;

class ContentEncoderTest : public ::testing::Test {
 protected:
  ContentEncoderTest() : pipeline_(suites::make_tiny_pipeline(3)) {}
  const ContentEncoder& enc() const { return *pipeline_.content; }
  suites::TinyPipeline pipeline_;
};

TEST_F(ContentEncoderTest, OneTokenPer2048Samples) {
  auto st = enc().make_state();
  EXPECT_EQ(enc().encode_chunk(noise_audio(2048, 1), st).size(), 1u);
  EXPECT_EQ(enc().encode_utterance(noise_audio(5 * 2048 + 100, 2)).size(), 5u);
}

TEST_F(ContentEncoderTest, ShortChunkIsCarried) {
  auto st = enc().make_state();
  EXPECT_TRUE(enc().encode_chunk(noise_audio(100, 3), st).empty());
  EXPECT_EQ(st.frontend.carry.size(), 100u);
  EXPECT_EQ(st.tokens, 0);
}

TEST_F(ContentEncoderTest, ChunkedEqualsOnePass) {
  const AudioChunk a = toy_source(2.0, 4);
  const auto whole = enc().encode_utterance(a);
  for (std::int64_t n : {std::int64_t{2028}, std::int64_t{2048}, std::int64_t{777}}) {
    auto st = enc().make_state();
    std::vector<ContentToken> got;
    for (const auto& c : split_chunks(a, n)) {
      const auto t = enc().encode_chunk(c, st);
      got.insert(got.end(), t.begin(), t.end());
    }
    EXPECT_EQ(got, whole) << "chunk " << n;
  }
}

TEST_F(ContentEncoderTest, TokensVaryAndStayInRange) {
  const auto tokens = enc().encode_utterance(toy_source(2.0, 5));
  std::set<int> distinct(tokens.begin(), tokens.end());
  EXPECT_GT(distinct.size(), 1u);
  for (int t : tokens) {
    EXPECT_GE(t, 0);
    EXPECT_LT(t, enc().config().codebook_size);
  }
}

TEST_F(ContentEncoderTest, StreamingMatchesFullSequenceStates) {
  const AudioChunk a = noise_audio(6 * 2048, 6);
  auto st = enc().make_state();
  const auto streamed = enc().encode_chunk_detailed(a, st);
  Tape tape;
  const Tensor full = pipeline_.content->forward_states(tape, mel_matrix(a)).value();
  ASSERT_EQ(static_cast<Eigen::Index>(streamed.states.size()), full.rows());
  for (Eigen::Index r = 0; r < full.rows(); ++r) {
    EXPECT_LT((streamed.states[r] - full.row(r)).norm(), 1e-9 * (1.0 + full.row(r).norm()));
  }
}

TEST_F(ContentEncoderTest, Causality) {
  const auto r = suites::content_causality(10, 7);
  EXPECT_GT(r.compared, 0);
  EXPECT_EQ(r.violations, 0);
}

TEST_F(ContentEncoderTest, CheckpointRoundTrip) {
  Checkpoint ck;
  enc().save(ck);
  const auto back = ContentEncoder::load(Checkpoint::deserialize(ck.serialize()));
  EXPECT_EQ(back->checksum(), enc().checksum());
  const AudioChunk a = noise_audio(4 * 2048, 8);
  EXPECT_EQ(back->encode_utterance(a), enc().encode_utterance(a));
}

TEST_F(ContentEncoderTest, CountsEncodeCalls) {
  const auto before = enc().encode_calls();
  auto st = enc().make_state();
  enc().encode_chunk(noise_audio(10, 9), st);
  EXPECT_EQ(enc().encode_calls(), before + 1);
}

TEST(Distill, ZeroDistillationTermAtOwnProjection) {
  ContentEncoder enc(testing::tiny_content_config());
  const AudioChunk a = noise_audio(4 * 2048, 10);
  Tape tape;
  const Tensor proj =
      enc.distill_projection(tape, enc.forward_states(tape, mel_matrix(a))).value();
  DistillTrainer trainer(enc);
  double distill = -1.0;
  Tape t2;
  trainer.loss(t2, {{a, proj}}, &distill);
  EXPECT_NEAR(distill, 0.0, 1e-20);
}

TEST(Distill, LossFallsOnFixedBatch) {
  const auto c = suites::distill_curve(60, 11);
  EXPECT_LT(c.last, c.first);
}

TEST(Distill, RejectsMismatchedTargets) {
  ContentEncoder enc(testing::tiny_content_config());
  DistillTrainer trainer(enc);
  EXPECT_THROW(trainer.train_step({{noise_audio(4 * 2048, 12), Tensor::Zero(3, 4)}}), DataError);
  EXPECT_THROW(trainer.train_step({}), DataError);
}

TEST(Distill, TargetFeatureFileRoundTrip) {
  const auto dir = testing::scratch_dir("target_features");
  Rng rng(13);
  const Tensor t = testing::random_tensor(5, 4, rng);
  save_target_features(dir / "t.bin", t);
  EXPECT_TRUE(load_target_features(dir / "t.bin").isApprox(t, 1e-6));
  EXPECT_THROW(load_target_features(dir / "missing.bin"), DataError);
}

}  // namespace
}  // namespace streamanon
