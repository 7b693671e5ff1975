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
#include <nlohmann/json.hpp>
#include <sstream>

#include "streamanon/cli.hpp"
#include "streamanon/wav.hpp"
#include "test_util.hpp"

namespace streamanon {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "streamanon");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Toy data, a manifest and a small checkpoint, built once per process.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("cli"));
    const fs::path& d = *dir_;
    std::ofstream(d / "tiny.cfg") << "[content_encoder]\ndim = 16\nffn_dim = 24\nlayers = 1\n"
                                     "codebook_size = 16\n[acoustic_codec]\ndim = 16\n"
                                     "codebooks = 2\ncodebook_size = 32\n[arvc]\ndim = 16\n"
                                     "ffn_dim = 24\nslow_layers = 1\nfast_layers = 1\n"
                                     "[speaker]\ndim = 8\n";
    ASSERT_EQ(cli({"make-toy-data", "--out", (d / "toy").string(), "--seed", "1"}).code, 0);
    ASSERT_EQ(cli({"pool-build", "--root", (d / "toy" / "pool").string(), "--out",
                   (d / "pool.jsonl").string()})
                  .code,
              0);
    const CliRun t = cli({"train-toy", "--config", (d / "tiny.cfg").string(), "--out",
                       (d / "model.ckpt").string(), "--content-steps", "3", "--codec-steps", "3",
                       "--arvc-steps", "3", "--codec-warmup-clips", "4"});
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path path(const std::string& name) { return *dir_ / name; }

  CliRun anonymize(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"anonymize",    "--in",   path("toy/source.wav").string(),
                                  "--out",        path(out).string(), "--checkpoint",
                                  path("model.ckpt").string(), "--pool",
                                  path("pool.jsonl").string(), "--seed", "7"};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, ToyDataAndManifest) {
  EXPECT_TRUE(fs::exists(path("toy/source.wav")));
  std::ifstream in(path("pool.jsonl"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) lines += !line.empty();
  EXPECT_EQ(lines, 20);
  const auto side = nlohmann::json::parse(slurp(path("pool.jsonl.manifest.json")));
  EXPECT_EQ(side.at("command"), "pool-build");
}

TEST_F(CliTest, AnonymizeKeepsDuration) {
  const CliRun r = anonymize("anon.wav");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(wav_duration_seconds(path("anon.wav")),
              wav_duration_seconds(path("toy/source.wav")), 1e-9);
}

TEST_F(CliTest, AnonymizeIsDeterministic) {
  ASSERT_EQ(anonymize("a1.wav").code, 0);
  ASSERT_EQ(anonymize("a2.wav").code, 0);
  EXPECT_EQ(slurp(path("a1.wav")), slurp(path("a2.wav")));
  // Sidecars differ only in the artifact path they describe.
  auto m1 = nlohmann::json::parse(slurp(path("a1.wav.manifest.json")));
  auto m2 = nlohmann::json::parse(slurp(path("a2.wav.manifest.json")));
  EXPECT_EQ(m1.at("artifact").at("fnv1a64"), m2.at("artifact").at("fnv1a64"));
  EXPECT_EQ(m1.at("inputs"), m2.at("inputs"));
}

TEST_F(CliTest, ChunkSizeDoesNotChangeOutput) {
  ASSERT_EQ(anonymize("c46.wav", {"--chunk-ms", "46"}).code, 0);
  ASSERT_EQ(anonymize("c276.wav", {"--chunk-ms", "276"}).code, 0);
  EXPECT_EQ(slurp(path("c46.wav")), slurp(path("c276.wav")));
}

TEST_F(CliTest, PrecomputedContextMatchesOnTheFly) {
  ASSERT_EQ(cli({"precompute-contexts", "--pool", path("pool.jsonl").string(), "--checkpoint",
                 path("model.ckpt").string(), "--out", path("ctx").string(), "--count", "2",
                 "--seed", "7"})
                .code,
            0);
  ASSERT_EQ(anonymize("fly.wav").code, 0);
  const CliRun r = cli({"anonymize", "--in", path("toy/source.wav").string(), "--out",
                     path("pre.wav").string(), "--checkpoint", path("model.ckpt").string(),
                     "--context", path("ctx/context_0.json").string(), "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("fly.wav")), slurp(path("pre.wav")));
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  std::ofstream(path("anon.cfg")) << "[streaming]\ndelay = 9\n";
  const CliRun bad = anonymize("x.wav", {"--config", path("anon.cfg").string()});
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("error"), std::string::npos);
  const CliRun good = anonymize("y.wav", {"--config", path("anon.cfg").string(), "--delay", "3"});
  EXPECT_EQ(good.code, 0) << good.err;
  EXPECT_NE(good.err.find("delay = 3"), std::string::npos);
}

TEST_F(CliTest, BenchReportsJson) {
  const CliRun r = cli({"bench", "--checkpoint", path("model.ckpt").string(), "--duration", "1",
                     "--chunk-ms", "92"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("rtf").get<double>(), j.at("mean_inference_ms").get<double>() / 92.0, 1e-9);
}

TEST_F(CliTest, MissingContextIsAnError) {
  const CliRun r = cli({"anonymize", "--in", path("toy/source.wav").string(), "--out",
                     path("z.wav").string(), "--checkpoint", path("model.ckpt").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--pool"), std::string::npos);
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const CliRun r = cli({"frobnicate"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE((r.out + r.err).find("Usage"), std::string::npos);
}

TEST(Cli, NoArgumentsIsAnError) { EXPECT_NE(cli({}).code, 0); }

TEST(Cli, EvalCommands) {
  const auto d = testing::scratch_dir("cli_eval");
  std::ofstream(d / "s.csv") << "trial_id,label,score\na,target,0.9\nb,target,0.7\nc,target,0.3\n"
                                "d,nontarget,0.8\ne,nontarget,0.2\nf,nontarget,0.1\n";
  std::ofstream(d / "ref.txt") << "a b c\n";
  std::ofstream(d / "hyp.txt") << "a x c\n";
  std::ofstream(d / "cm.csv") << "8,2\n4,6\n";
  CliRun r = cli({"eval", "eer", "--scores", (d / "s.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("rate").get<double>(), 1.0 / 3.0, 1e-12);
  r = cli({"eval", "wer", "--ref", (d / "ref.txt").string(), "--hyp", (d / "hyp.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("rate").get<double>(), 1.0 / 3.0, 1e-12);
  r = cli({"eval", "uar", "--confusion", (d / "cm.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("rate").get<double>(), 0.7, 1e-12);
  EXPECT_NE(cli({"eval", "eer", "--scores", (d / "missing.csv").string()}).code, 0);
}

}  // namespace
}  // namespace streamanon
