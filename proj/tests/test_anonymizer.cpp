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
#include <set>

#include "streamanon/anonymizer.hpp"
#include "streamanon/speaker.hpp"
#include "streamanon/toy_data.hpp"
#include "suites.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

using testing::random_row;

class AnonymizerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new std::filesystem::path(testing::scratch_dir("anonymizer_pool"));
    write_toy_pool(*root_ / "pool", 1);
  }
  static void TearDownTestSuite() { delete root_; }

  AnonymizerTest()
      : pool_(PromptPool::build_from_directory(*root_ / "pool")),
        pipeline_(suites::make_tiny_pipeline(2)),
        embedder_(8) {}

  ContextModels models() const {
    return {pipeline_.content.get(), pipeline_.codec.get(), &embedder_};
  }

  static std::filesystem::path* root_;
  PromptPool pool_;
  suites::TinyPipeline pipeline_;
  SpeakerEmbedder embedder_;
};

std::filesystem::path* AnonymizerTest::root_ = nullptr;

// Loader serving synthetic audio whose length is the entry's nominal duration.
AudioChunk synthetic_loader(const PromptEntry& e) {
  return toy_source(e.duration_seconds, std::hash<std::string>{}(e.audio_path.string()));
}

PromptEntry entry(const std::string& name, double seconds) {
  return {name, DatasetTag::kVctk, "p9", "", seconds};
}

TEST_F(AnonymizerTest, PoolCoversEveryDataset) {
  EXPECT_EQ(pool_.entries().size(), 20u);
  std::set<DatasetTag> tags;
  for (const auto& e : pool_.entries()) tags.insert(e.dataset);
  EXPECT_EQ(tags.size(), 4u);
}

TEST_F(AnonymizerTest, ManifestRoundTrip) {
  const auto path = *root_ / "manifest.jsonl";
  pool_.save_manifest(path);
  EXPECT_EQ(PromptPool::load_manifest(path).entries(), pool_.entries());
}

TEST_F(AnonymizerTest, ManifestRejectsUnknownDataset) {
  const auto path = *root_ / "bad.jsonl";
  std::ofstream(path) << R"({"path":"a.wav","dataset":"TIMIT","speaker":"x","emotion":"","duration":1.0})"
                      << "\n";
  EXPECT_THROW(PromptPool::load_manifest(path), DataError);
}

TEST_F(AnonymizerTest, CrossDatasetIsOnePerDataset) {
  Rng rng(3);
  const auto sel = select_prompts(pool_, SelectionStrategy::parse("cross-ds-4rnd"), rng);
  std::multiset<std::string> tags;
  for (const auto& e : sel) tags.insert(dataset_name(e.dataset));
  EXPECT_EQ(tags, (std::multiset<std::string>{"VCTK", "VoxCeleb1", "CREMA-D", "ESD"}));
}

TEST_F(AnonymizerTest, FixedSpeakerIsStableAcrossSeeds) {
  const auto strategy = SelectionStrategy::parse("vctk-1fix", "p001");
  Rng a(4), b(5);
  EXPECT_EQ(select_prompts(pool_, strategy, a)[0].speaker, "p001");
  EXPECT_EQ(select_prompts(pool_, strategy, b)[0].speaker, "p001");
}

TEST_F(AnonymizerTest, EmotionStrategyCoversFourEmotions) {
  Rng rng(6);
  const auto sel = select_prompts(pool_, SelectionStrategy::parse("cremad-emo-4rnd"), rng);
  std::multiset<std::string> emotions;
  for (const auto& e : sel) emotions.insert(e.emotion);
  EXPECT_EQ(emotions, (std::multiset<std::string>{"angry", "neutral", "sad", "happy"}));
}

TEST_F(AnonymizerTest, AllStrategiesHoldOverSeededDraws) {
  const auto r = suites::anonymizer_contracts(20, 7, testing::scratch_dir("anonymizer_contracts"));
  EXPECT_EQ(r.strategy_violations, 0) << r.detail;
  EXPECT_EQ(r.crop_violations, 0) << r.detail;
  EXPECT_LE(r.mix_max_diff, 1e-12);
  EXPECT_TRUE(r.g_anon_same_across_delays);
}

TEST_F(AnonymizerTest, InsufficientPoolIsAnError) {
  const PromptPool tiny({pool_.entries()[0]});
  Rng rng(8);
  EXPECT_THROW(select_prompts(tiny, SelectionStrategy::parse("cross-ds-4rnd"), rng), DataError);
  EXPECT_THROW(select_prompts(tiny, SelectionStrategy::parse("vctk-4rnd"), rng), DataError);
  EXPECT_THROW(select_prompts(pool_, SelectionStrategy::parse("vctk-1fix", "nobody"), rng),
               DataError);
  EXPECT_THROW(SelectionStrategy::parse("best-guess"), ConfigError);
}

TEST_F(AnonymizerTest, FourLongPromptsAreCroppedToThreeSeconds) {
  ContextModels m = models();
  m.loader = synthetic_loader;
  Rng rng(9);
  const auto ctx = prepare_context(
      {entry("a", 10.0), entry("b", 10.0), entry("c", 10.0), entry("d", 10.0)}, rng, m);
  ASSERT_EQ(ctx.crops.size(), 4u);
  for (const auto& c : ctx.crops) EXPECT_NEAR(c.duration_seconds(), 3.0, 1.0 / kSampleRate);
  EXPECT_NEAR(ctx.total_prompt_seconds(), 12.0, 4.0 / kSampleRate);
}

TEST_F(AnonymizerTest, ShortSinglePromptIsNotCropped) {
  ContextModels m = models();
  m.loader = synthetic_loader;
  Rng rng(10);
  const auto ctx = prepare_context({entry("a", 2.0)}, rng, m);
  ASSERT_EQ(ctx.crops.size(), 1u);
  EXPECT_EQ(ctx.crops[0].start_sample, 0);
  EXPECT_NEAR(ctx.crops[0].duration_seconds(), 2.0, 1e-9);
}

TEST_F(AnonymizerTest, SameSeedSameContext) {
  const auto s = SelectionStrategy::parse("vctk-4rnd");
  const AnonContext a = build_context(pool_, s, 11, models());
  const AnonContext b = build_context(pool_, s, 11, models());
  EXPECT_EQ(a.to_json(), b.to_json());
  const AnonContext c = build_context(pool_, s, 12, models());
  EXPECT_NE(a.g_anon.values, c.g_anon.values);
}

TEST(MixEmbedding, AlphaOneIsTheNormalizedMean) {
  Rng rng(13);
  const RowVec e1 = unit_normalize(random_row(6, rng)), e2 = unit_normalize(random_row(6, rng));
  Rng mix(14);
  const auto g = mix_embedding({e1, e2}, 1.0, mix);
  EXPECT_TRUE(g.values.isApprox(unit_normalize((e1 + e2) / 2.0), 1e-12));
  EXPECT_EQ(g.source, EmbeddingSource::kMixed);
}

TEST(MixEmbedding, AlphaZeroIgnoresPrompts) {
  Rng rng(15);
  const RowVec e1 = unit_normalize(random_row(6, rng)), e2 = unit_normalize(random_row(6, rng));
  Rng m1(16), m2(16);
  const auto a = mix_embedding({e1}, 0.0, m1);
  const auto b = mix_embedding({e2}, 0.0, m2);
  EXPECT_TRUE(a.values.isApprox(b.values, 1e-12));
}

TEST(MixEmbedding, DefaultAlphaMatchesHandComputation) {
  Rng rng(17);
  std::vector<RowVec> embs;
  for (int i = 0; i < 3; ++i) embs.push_back(unit_normalize(random_row(5, rng)));
  Rng mix(18), copy(18);
  const auto g = mix_embedding(embs, kDefaultAlpha, mix);
  const RowVec gs = sample_pseudo_speaker(5, 1.0, copy);
  const RowVec mean = (embs[0] + embs[1] + embs[2]) / 3.0;
  EXPECT_TRUE(g.values.isApprox(unit_normalize(0.9 * mean + 0.1 * gs), 1e-6));
  EXPECT_NEAR(gs.norm(), 1.0, 1e-12);
}

TEST(MixEmbedding, RejectsBadArguments) {
  Rng rng(19);
  EXPECT_THROW(mix_embedding({}, 0.5, rng), DataError);
  EXPECT_THROW(mix_embedding({RowVec::Ones(3)}, 1.5, rng), ConfigError);
  EXPECT_THROW(mix_embedding({RowVec::Ones(3)}, -0.1, rng), ConfigError);
}

TEST_F(AnonymizerTest, PrecomputedContextsRoundTrip) {
  const auto dir = testing::scratch_dir("contexts");
  const auto s = SelectionStrategy::parse("cross-ds-4rnd");
  const auto paths = precompute_contexts(pool_, s, 10, 100, models(), dir);
  ASSERT_EQ(paths.size(), 10u);
  const AnonContext loaded = AnonContext::load(paths[3]);
  const AnonContext fresh = build_context(pool_, s, 103, models());
  EXPECT_EQ(loaded.to_json(), fresh.to_json());
  std::set<std::vector<double>> distinct;
  for (const auto& p : paths) {
    const RowVec g = AnonContext::load(p).g_anon.values;
    distinct.insert(std::vector<double>(g.data(), g.data() + g.size()));
  }
  EXPECT_GE(distinct.size(), 9u);
}

TEST_F(AnonymizerTest, SessionWithPrecomputedContextSkipsPromptEncoding) {
  const auto dir = testing::scratch_dir("contexts_calls");
  precompute_contexts(pool_, SelectionStrategy::parse("vctk-1rnd"), 1, 1, models(), dir);
  const AnonContext ctx = AnonContext::load(context_path(dir, 0));
  const auto content_before = pipeline_.content->encode_calls();
  const auto codec_before = pipeline_.codec->encode_calls();
  SessionConfig cfg;
  StreamingSession session(pipeline_.models(), cfg, ctx);
  // Starting the session touches no encoder; only the source audio does.
  EXPECT_EQ(pipeline_.content->encode_calls(), content_before);
  EXPECT_EQ(pipeline_.codec->encode_calls(), codec_before);
  session.push(toy_source(0.2, 1));
  EXPECT_EQ(pipeline_.codec->encode_calls(), codec_before);
}

TEST(AnonContextJson, RejectsMalformedInput) {
  EXPECT_THROW(AnonContext::from_json("{not json"), DataError);
  EXPECT_THROW(AnonContext::from_json("{}"), DataError);
}

}  // namespace
}  // namespace streamanon
