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

#include "streamanon/speaker.hpp"
#include "streamanon/toy_data.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

AudioChunk speaker_clip(int speaker, std::uint64_t seed) {
  Rng rng(seed);
  return render_tones(toy_speaker(speaker), random_tones(rng, 24), rng);
}

TEST(SpeakerEmbedder, UnitNorm) {
  const SpeakerEmbedder e(64);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(e.extract(speaker_clip(i, 10 + i)).values.norm(), 1.0, 1e-6);
  }
  EXPECT_NEAR(e.extract(testing::noise_audio(kSampleRate, 1)).values.norm(), 1.0, 1e-6);
}

TEST(SpeakerEmbedder, Deterministic) {
  const SpeakerEmbedder a(64), b(64);
  const AudioChunk clip = speaker_clip(0, 2);
  EXPECT_EQ(a.extract(clip).values, b.extract(clip).values);
}

TEST(SpeakerEmbedder, SeparatesSyntheticSpeakers) {
  const SpeakerEmbedder e(64);
  // Two voices with distinct spectral tilt and pitch, three clips each.
  std::vector<RowVec> s0, s1;
  for (int i = 0; i < 3; ++i) {
    s0.push_back(e.extract(speaker_clip(0, 100 + i)).values);
    s1.push_back(e.extract(speaker_clip(5, 200 + i)).values);
  }
  double same = 0.0, cross = 0.0;
  int ns = 0, nc = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i < j) {
        same += cosine_similarity(s0[i], s0[j]) + cosine_similarity(s1[i], s1[j]);
        ns += 2;
      }
      cross += cosine_similarity(s0[i], s1[j]);
      ++nc;
    }
  }
  EXPECT_GT(same / ns, cross / nc);
}

TEST(SpeakerEmbedder, RejectsShortOrWrongRateAudio) {
  const SpeakerEmbedder e(8);
  EXPECT_THROW(e.extract(testing::noise_audio(1000, 3)), DataError);
  AudioChunk wrong = testing::noise_audio(kSampleRate, 4);
  wrong.sample_rate = 16000;
  EXPECT_THROW(e.extract(wrong), ConfigError);
  EXPECT_THROW(SpeakerEmbedder(0), ConfigError);
}

TEST(EmbeddingFile, RoundTrip) {
  const auto dir = testing::scratch_dir("embedding");
  const SpeakerEmbedder e(16);
  const SpeakerEmbedding g = e.extract(speaker_clip(1, 5));
  save_embedding(dir / "g.spk", g);
  const SpeakerEmbedding back = load_embedding(dir / "g.spk", 16);
  EXPECT_LT((back.values - g.values).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(back.source, EmbeddingSource::kExternal);
}

TEST(EmbeddingFile, ZeroVectorIsRejected) {
  const auto dir = testing::scratch_dir("embedding_zero");
  std::ofstream out(dir / "z.spk", std::ios::binary);
  const std::uint32_t dim = 4;
  const float zeros[4] = {0, 0, 0, 0};
  out.write("SPKE", 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(zeros), sizeof(zeros));
  out.close();
  EXPECT_THROW(load_embedding(dir / "z.spk", 4), DataError);
}

TEST(EmbeddingFile, DimensionMismatchIsRejected) {
  const auto dir = testing::scratch_dir("embedding_dim");
  const SpeakerEmbedder e(16);
  save_embedding(dir / "g.spk", e.extract(speaker_clip(2, 6)));
  EXPECT_THROW(load_embedding(dir / "g.spk", 64), DataError);
  EXPECT_THROW(load_embedding(dir / "missing.spk", 16), DataError);
}

TEST(UnitNormalize, RejectsZero) {
  EXPECT_THROW(unit_normalize(RowVec::Zero(3)), DataError);
  RowVec v(2);
  v << 3.0, 4.0;
  EXPECT_TRUE(unit_normalize(v).isApprox(v / 5.0));
}

}  // namespace
}  // namespace streamanon
