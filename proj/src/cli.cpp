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

#include "streamanon/cli.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "streamanon/anonymizer.hpp"
#include "streamanon/checkpoint.hpp"
#include "streamanon/eval.hpp"
#include "streamanon/streaming.hpp"
#include "streamanon/toy_data.hpp"
#include "streamanon/wav.hpp"

namespace streamanon {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string show(const std::string& v) { return v; }
std::string show(int v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void assign(const std::string& s, std::string& v) { v = s; }
void assign(const std::string& s, int& v) { v = std::stoi(s); }
void assign(const std::string& s, std::uint64_t& v) { v = std::stoull(s); }
void assign(const std::string& s, double& v) { v = std::stod(s); }
void assign(const std::string& s, bool& v) {
  if (s == "true" || s == "1") {
    v = true;
  } else if (s == "false" || s == "0") {
    v = false;
  } else {
    throw std::invalid_argument(s);
  }
}

// Flags bound to config keys. A flag given on the command line wins over
// the config file; otherwise the file value (if any) replaces the default.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "key/value config file");
  }

  template <class T>
  CLI::Option* add(const std::string& flag, const std::string& key, T& target,
                   const std::string& help) {
    CLI::Option* opt = app_->add_option(flag, target, help)->capture_default_str();
    bindings_.push_back({opt, key,
                         [&target](const std::string& s) { assign(s, target); },
                         [&target] { return show(target); }});
    return opt;
  }

  CLI::Option* flag(const std::string& flag, const std::string& key, bool& target,
                    const std::string& help) {
    CLI::Option* opt = app_->add_flag(flag, target, help);
    bindings_.push_back({opt, key, [&target](const std::string& s) { assign(s, target); },
                         [&target] { return show(target); }});
    return opt;
  }

  // Applies the config file; returns the fully resolved settings.
  const KeyValueConfig& resolve() {
    if (!config_path_.empty()) file_ = KeyValueConfig::load(config_path_);
    for (auto& b : bindings_) {
      if (b.opt->count() == 0 && file_.has(b.key)) {
        const std::string raw = file_.get_string(b.key, "");
        try {
          b.assign(raw);
        } catch (const std::exception&) {
          throw ConfigError("config key " + b.key + " has invalid value '" + raw + "'");
        }
      }
      resolved_.set(b.key, b.show());
    }
    return resolved_;
  }

  const KeyValueConfig& file() const { return file_; }
  const KeyValueConfig& resolved() const { return resolved_; }

 private:
  struct Binding {
    CLI::Option* opt;
    std::string key;
    std::function<void(const std::string&)> assign;
    std::function<std::string()> show;
  };
  CLI::App* app_;
  std::string config_path_;
  KeyValueConfig file_;
  KeyValueConfig resolved_;
  std::vector<Binding> bindings_;
};

void log_resolved(std::ostream& err, const std::string& command, const KeyValueConfig& kv) {
  err << "[streamanon] " << command << " resolved config:\n" << kv.to_text();
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

json kv_json(const KeyValueConfig& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv.values()) j[k] = v;
  return j;
}

// Everything needed to reproduce the artifact; no timestamps, so reruns
// produce identical sidecars.
void write_sidecar(const fs::path& artifact, const std::string& command,
                   const KeyValueConfig& resolved, const std::map<std::string, fs::path>& inputs) {
  json j;
  j["command"] = command;
  j["config"] = kv_json(resolved);
  json files = json::object();
  for (const auto& [role, path] : inputs) {
    files[role] = {{"path", path.string()}, {"fnv1a64", file_hash(path)}};
  }
  j["inputs"] = files;
  j["artifact"] = {{"path", artifact.string()}, {"fnv1a64", file_hash(artifact)}};
  std::ofstream out(artifact.string() + ".manifest.json");
  if (!out) throw DataError("cannot write manifest for " + artifact.string());
  out << j.dump(2) << "\n";
}

ContextModels context_models(const ModelBundle& b) {
  ContextModels m;
  m.content = b.content.get();
  m.codec = b.codec.get();
  m.embedder = b.embedder.get();
  return m;
}

PipelineModels pipeline_models(const ModelBundle& b) {
  return PipelineModels{b.content.get(), b.codec.get(), b.arvc.get()};
}

struct ContextArgs {
  std::string pool;
  std::string context;
  std::string strategy = "cross-ds-4rnd";
  std::string fixed_speaker;
  double alpha = kDefaultAlpha;
};

void add_context_flags(Settings& s, ContextArgs& a) {
  s.add("--pool", "anonymizer.pool", a.pool, "prompt pool manifest (JSONL)");
  s.add("--context", "anonymizer.context", a.context, "precomputed context file");
  s.add("--strategy", "anonymizer.strategy", a.strategy,
        "vctk-1fix|vctk-1rnd|vctk-4rnd|cross-ds-4rnd|cremad-emo-4rnd");
  s.add("--fixed-speaker", "anonymizer.fixed_speaker", a.fixed_speaker,
        "speaker for vctk-1fix (default: first VCTK speaker)");
  s.add("--alpha", "anonymizer.alpha", a.alpha, "prompt weight in the embedding mix");
}

AnonContext resolve_context(const ContextArgs& a, std::uint64_t seed, const ModelBundle& b,
                            std::map<std::string, fs::path>& inputs) {
  if (!a.context.empty()) {
    inputs["context"] = a.context;
    return AnonContext::load(a.context);
  }
  if (a.pool.empty()) {
    throw ConfigError("no anonymization context: pass --pool <manifest.jsonl> or --context <file>");
  }
  inputs["pool"] = a.pool;
  const PromptPool pool = PromptPool::load_manifest(a.pool);
  return build_context(pool, SelectionStrategy::parse(a.strategy, a.fixed_speaker), seed,
                       context_models(b), a.alpha);
}

}  // namespace

// --- bundle / training ----------------------------------------------------

void ModelBundle::save(const fs::path& path) const {
  Checkpoint ck;
  content->save(ck);
  codec->save(ck);
  arvc->save(ck);
  ck.config.set("speaker.dim", std::to_string(embedder->dim()));
  ck.config.set("speaker.seed", std::to_string(embedder->seed()));
  ck.save(path);
}

ModelBundle ModelBundle::load(const fs::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  ModelBundle b;
  b.content = ContentEncoder::load(ck);
  b.codec = AcousticCodec::load(ck);
  b.arvc = ArvcModel::load(ck);
  b.embedder = std::make_unique<SpeakerEmbedder>(
      ck.config.get_int("speaker.dim", 64),
      std::stoull(ck.config.get_string("speaker.seed", "3")));
  return b;
}

ModelBundle train_toy(const TrainToyOptions& options, std::ostream& log) {
  const KeyValueConfig& kv = options.model_config;
  const auto cc = ContentEncoderConfig::read(kv);
  const auto ac = AcousticCodecConfig::read(kv);
  auto arc = ArvcConfig::read(kv);
  const int spk_dim = kv.get_int("speaker.dim", 64);
  arc.content_vocab = cc.codebook_size;
  arc.codebooks = ac.codebooks;
  arc.acoustic_vocab = ac.codebook_size;
  arc.speaker_dim = spk_dim;

  ModelBundle b;
  b.content = std::make_unique<ContentEncoder>(cc);
  b.codec = std::make_unique<AcousticCodec>(ac);
  b.arvc = std::make_unique<ArvcModel>(arc);
  b.embedder = std::make_unique<SpeakerEmbedder>(
      spk_dim, std::stoull(kv.get_string("speaker.seed", "3")));

  Rng rng(options.seed);
  std::uniform_int_distribution<int> speaker(0, 7);
  AdamWOptions opt;
  opt.lr = options.learning_rate;

  DistillTrainer distill(*b.content, opt, options.seed + 1);
  for (int step = 1; step <= options.content_steps; ++step) {
    std::vector<DistillExample> batch;
    for (int i = 0; i < 4; ++i) {
      batch.push_back(toy_distill_example(rng, speaker(rng), 16, cc.target_dim));
    }
    const double loss = distill.train_step(batch);
    if (step % 50 == 0 || step == options.content_steps) {
      log << "[train-toy] content step " << step << " loss " << loss << "\n";
    }
  }

  b.codec->warm_start(toy_codec_warmup(rng, options.codec_warmup_clips), rng);
  AdamWOptions codec_opt = opt;
  codec_opt.lr = options.codec_learning_rate;
  CodecTrainer codec(*b.codec, codec_opt, options.seed + 2);
  for (int step = 1; step <= options.codec_steps; ++step) {
    std::vector<AudioChunk> batch;
    for (int i = 0; i < 4; ++i) {
      batch.push_back(render_tones(toy_speaker(speaker(rng)), random_tones(rng, 8), rng));
    }
    const double loss = codec.train_step(batch);
    if (step % 50 == 0 || step == options.codec_steps) {
      log << "[train-toy] codec step " << step << " loss " << loss << "\n";
    }
  }

  // Converter data: toy utterances re-synthesized by their own speaker.
  std::vector<ArvcExample> data;
  for (int i = 0; i < 32; ++i) {
    const AudioChunk audio = render_tones(toy_speaker(i % 8), random_tones(rng, 24), rng);
    ArvcExample ex;
    ex.speaker = b.embedder->extract(audio).values;
    ex.content = b.content->encode_utterance(audio);
    ex.acoustic = b.codec->encode_utterance(audio);
    const std::size_t t = std::min(ex.content.size(), ex.acoustic.size());
    ex.content.resize(t);
    ex.acoustic.resize(t);
    data.push_back(std::move(ex));
  }
  ArvcTrainer trainer(*b.arvc, FrozenDependencies{b.content.get(), b.codec.get()}, opt,
                      options.seed + 3);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  for (int step = 1; step <= options.arvc_steps; ++step) {
    std::vector<ArvcExample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(data[pick(rng)]);
    const double loss = trainer.train_step(batch, arc.schedule);
    if (step % 50 == 0 || step == options.arvc_steps) {
      log << "[train-toy] arvc step " << step << " loss/frame " << loss << "\n";
    }
  }
  trainer.verify_frozen();
  return b;
}

// --- subcommands ----------------------------------------------------------

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming speaker anonymization toolkit", "streamanon"};
  app.require_subcommand(1);

  // make-toy-data
  auto* toy = app.add_subcommand("make-toy-data", "write a synthetic prompt pool and source WAV");
  Settings toy_s(toy);
  std::string toy_out;
  std::uint64_t toy_seed = 0;
  double toy_seconds = 3.0;
  toy_s.add("--out", "toy.out", toy_out, "output directory")->required();
  toy_s.add("--seed", "toy.seed", toy_seed, "random seed");
  toy_s.add("--source-seconds", "toy.source_seconds", toy_seconds, "source WAV length");

  // pool-build
  auto* pool = app.add_subcommand("pool-build", "scan <dataset>/<speaker>/*.wav into a manifest");
  Settings pool_s(pool);
  std::string pool_root, pool_out, pool_embed;
  pool_s.add("--root", "pool.root", pool_root, "pool directory tree")->required();
  pool_s.add("--out", "pool.out", pool_out, "manifest path (JSONL)")->required();
  pool_s.add("--embed-dir", "pool.embed_dir", pool_embed,
             "also write one speaker embedding per entry here");

  // train-toy
  auto* train = app.add_subcommand("train-toy", "train the toy models into one checkpoint");
  Settings train_s(train);
  std::string train_out;
  TrainToyOptions topt;
  train_s.add("--out", "train.out", train_out, "checkpoint path")->required();
  train_s.add("--seed", "train.seed", topt.seed, "random seed");
  train_s.add("--content-steps", "train.content_steps", topt.content_steps, "distillation steps");
  train_s.add("--codec-steps", "train.codec_steps", topt.codec_steps, "codec steps");
  train_s.add("--arvc-steps", "train.arvc_steps", topt.arvc_steps, "converter steps");
  train_s.add("--lr", "train.lr", topt.learning_rate, "learning rate");
  train_s.add("--codec-warmup-clips", "train.codec_warmup_clips", topt.codec_warmup_clips,
              "toy clips for the codec warm start");
  train_s.add("--codec-lr", "train.codec_lr", topt.codec_learning_rate,
              "codec fine-tuning learning rate");

  // precompute-contexts
  auto* pre = app.add_subcommand("precompute-contexts", "build and store anonymization contexts");
  Settings pre_s(pre);
  ContextArgs pre_ctx;
  std::string pre_ckpt, pre_out;
  int pre_count = 10;
  std::uint64_t pre_seed = 0;
  add_context_flags(pre_s, pre_ctx);
  pre_s.add("--checkpoint", "model.checkpoint", pre_ckpt, "model checkpoint")->required();
  pre_s.add("--out", "precompute.out", pre_out, "output directory")->required();
  pre_s.add("--count", "precompute.count", pre_count, "number of contexts");
  pre_s.add("--seed", "anonymizer.seed", pre_seed, "seed of context 0 (context i uses seed+i)");

  // anonymize
  auto* anon = app.add_subcommand("anonymize", "anonymize a WAV file through a streaming session");
  Settings anon_s(anon);
  ContextArgs anon_ctx;
  std::string anon_in, anon_out, anon_ckpt;
  std::uint64_t anon_seed = 0;
  double chunk_ms = 46.0;
  int delay = 2;
  bool sample = false;
  int top_k = 16;
  double temperature = 0.8;
  add_context_flags(anon_s, anon_ctx);
  anon_s.add("--in", "io.in", anon_in, "input WAV (mono, 44.1 kHz)")->required();
  anon_s.add("--out", "io.out", anon_out, "output WAV")->required();
  anon_s.add("--checkpoint", "model.checkpoint", anon_ckpt, "model checkpoint")->required();
  anon_s.add("--seed", "anonymizer.seed", anon_seed, "anonymization seed");
  anon_s.add("--chunk-ms", "streaming.chunk_ms", chunk_ms, "chunk size in ms (46, 92, 276, ...)");
  anon_s.add("--delay", "streaming.delay", delay, "emission delay in frames (1..8)");
  anon_s.flag("--sample", "decode.sample", sample, "top-k sampling instead of greedy decoding");
  anon_s.add("--top-k", "decode.top_k", top_k, "top-k for sampling");
  anon_s.add("--temperature", "decode.temperature", temperature, "sampling temperature");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "measure latency and RTF on synthetic audio");
  Settings bench_s(bench_cmd);
  ContextArgs bench_ctx;
  std::string bench_ckpt, bench_report = "json", bench_out;
  std::uint64_t bench_seed = 0;
  double bench_chunk = 46.0, bench_seconds = 10.0, overhead = 0.0;
  int bench_delay = 2;
  add_context_flags(bench_s, bench_ctx);
  bench_s.add("--checkpoint", "model.checkpoint", bench_ckpt, "model checkpoint")->required();
  bench_s.add("--chunk-ms", "streaming.chunk_ms", bench_chunk, "chunk size in ms");
  bench_s.add("--delay", "streaming.delay", bench_delay, "emission delay in frames");
  bench_s.add("--duration", "bench.duration", bench_seconds, "synthetic audio seconds");
  bench_s.add("--overhead-ms", "bench.overhead_ms", overhead, "extra fixed cost per chunk");
  bench_s.add("--seed", "anonymizer.seed", bench_seed, "seed");
  bench_s.add("--report", "bench.report", bench_report, "json|text")
      ->check(CLI::IsMember({"json", "text"}));
  bench_s.add("--out", "bench.out", bench_out, "also write the report here");

  // eval
  auto* ev = app.add_subcommand("eval", "compute EER, WER or UAR from files");
  ev->require_subcommand(1);
  auto* ev_eer = ev->add_subcommand("eer", "equal error rate from trial scores");
  std::string scores_path;
  ev_eer->add_option("--scores", scores_path, "CSV trial_id,label,score")
      ->required()->check(CLI::ExistingFile);
  auto* ev_wer = ev->add_subcommand("wer", "word error rate");
  std::string ref_path, hyp_path;
  ev_wer->add_option("--ref", ref_path, "reference transcripts, one per line")
      ->required()->check(CLI::ExistingFile);
  ev_wer->add_option("--hyp", hyp_path, "hypothesis transcripts, one per line")
      ->required()->check(CLI::ExistingFile);
  auto* ev_uar = ev->add_subcommand("uar", "unweighted average recall");
  std::string cm_path;
  ev_uar->add_option("--confusion", cm_path, "confusion matrix CSV, rows = true class")
      ->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    err << app.help();
    return code == 0 ? 2 : code;
  }

  try {
    if (*toy) {
      log_resolved(err, "make-toy-data", toy_s.resolve());
      const fs::path root(toy_out);
      fs::create_directories(root);
      write_toy_pool(root / "pool", toy_seed);
      write_wav(root / "source.wav", toy_source(toy_seconds, toy_seed + 1), WavEncoding::kPcm16);
      write_sidecar(root / "source.wav", "make-toy-data", toy_s.resolved(), {});
      out << json{{"pool", (root / "pool").string()}, {"source", (root / "source.wav").string()}}
                 .dump()
          << "\n";
    } else if (*pool) {
      log_resolved(err, "pool-build", pool_s.resolve());
      const PromptPool p = PromptPool::build_from_directory(pool_root);
      if (p.entries().empty()) throw DataError("no .wav files under " + pool_root);
      p.save_manifest(pool_out);
      if (!pool_embed.empty()) {
        const SpeakerEmbedder embedder;
        fs::create_directories(pool_embed);
        for (std::size_t i = 0; i < p.entries().size(); ++i) {
          save_embedding(fs::path(pool_embed) / ("entry_" + std::to_string(i) + ".spke"),
                         embedder.extract(read_wav(p.entries()[i].audio_path)));
        }
      }
      write_sidecar(pool_out, "pool-build", pool_s.resolved(), {});
      out << json{{"manifest", pool_out}, {"entries", p.entries().size()}}.dump() << "\n";
    } else if (*train) {
      train_s.resolve();
      topt.model_config = train_s.file();
      KeyValueConfig resolved = train_s.resolved();
      ContentEncoderConfig::read(topt.model_config).write(resolved);
      AcousticCodecConfig::read(topt.model_config).write(resolved);
      ArvcConfig::read(topt.model_config).write(resolved);
      log_resolved(err, "train-toy", resolved);
      const ModelBundle b = train_toy(topt, err);
      b.save(train_out);
      write_sidecar(train_out, "train-toy", resolved, {});
      out << json{{"checkpoint", train_out}, {"fnv1a64", file_hash(train_out)}}.dump() << "\n";
    } else if (*pre) {
      log_resolved(err, "precompute-contexts", pre_s.resolve());
      const ModelBundle b = ModelBundle::load(pre_ckpt);
      if (pre_ctx.pool.empty()) throw ConfigError("precompute-contexts needs --pool");
      const PromptPool p = PromptPool::load_manifest(pre_ctx.pool);
      const auto paths = precompute_contexts(
          p, SelectionStrategy::parse(pre_ctx.strategy, pre_ctx.fixed_speaker), pre_count,
          pre_seed, context_models(b), pre_out, pre_ctx.alpha);
      for (const auto& path : paths) {
        write_sidecar(path, "precompute-contexts", pre_s.resolved(),
                      {{"checkpoint", pre_ckpt}, {"pool", pre_ctx.pool}});
      }
      out << json{{"contexts", paths.size()}, {"dir", pre_out}}.dump() << "\n";
    } else if (*anon) {
      log_resolved(err, "anonymize", anon_s.resolve());
      const ModelBundle b = ModelBundle::load(anon_ckpt);
      std::map<std::string, fs::path> inputs{{"checkpoint", anon_ckpt}, {"audio", anon_in}};
      const AnonContext ctx = resolve_context(anon_ctx, anon_seed, b, inputs);
      const AudioChunk audio = read_wav(anon_in);
      if (audio.sample_rate != kSampleRate) {
        throw DataError(anon_in + ": sample rate " + std::to_string(audio.sample_rate) +
                        ", expected 44100");
      }
      SessionConfig sc;
      sc.chunk_ms = chunk_ms;
      sc.delay = delay;
      sc.decode = DecodeOptions{!sample, top_k, temperature, anon_seed};
      const SessionResult result = run_session(split_chunks(audio, chunk_samples(chunk_ms)), sc,
                                               ctx, pipeline_models(b));
      const AudioChunk anonymized = result.concatenated();
      write_wav(anon_out, anonymized, WavEncoding::kFloat32);
      write_sidecar(anon_out, "anonymize", anon_s.resolved(), inputs);
      out << json{{"output", anon_out},
                  {"input_seconds", audio.duration_seconds()},
                  {"output_seconds", anonymized.duration_seconds()},
                  {"frames", result.metrics.frames_out},
                  {"rtf", result.metrics.rtf()}}
                 .dump()
          << "\n";
    } else if (*bench_cmd) {
      log_resolved(err, "bench", bench_s.resolve());
      const ModelBundle b = ModelBundle::load(bench_ckpt);
      std::map<std::string, fs::path> inputs;
      const AnonContext ctx =
          bench_ctx.pool.empty() && bench_ctx.context.empty()
              ? prompt_free_context(b.arvc->config().speaker_dim, bench_seed)
              : resolve_context(bench_ctx, bench_seed, b, inputs);
      SessionConfig sc;
      sc.chunk_ms = bench_chunk;
      sc.delay = bench_delay;
      sc.per_chunk_overhead_ms = overhead;
      const BenchReport report = bench(sc, pipeline_models(b), ctx, bench_seconds, bench_seed);
      std::string text;
      if (bench_report == "json") {
        text = report.to_json();
      } else {
        std::ostringstream os;
        os << "chunk_ms " << report.metrics.chunk_ms << "\ndelay " << report.metrics.delay
           << "\nmean_inference_ms " << report.metrics.mean_inference_ms()
           << "\np95_inference_ms " << report.metrics.p95_inference_ms() << "\nrtf "
           << report.metrics.rtf() << "\npredicted_latency_ms "
           << report.metrics.predicted_latency_ms() << "\n";
        text = os.str();
      }
      out << text;
      if (!bench_out.empty()) {
        std::ofstream f(bench_out);
        if (!f) throw DataError("cannot write " + bench_out);
        f << text;
      }
    } else if (*ev) {
      json j;
      if (*ev_eer) {
        const ScoreSet s = read_score_csv(scores_path);
        const EerResult r = eer(s);
        j = {{"metric", "eer"}, {"rate", r.rate}, {"threshold", r.threshold},
             {"genuine", s.genuine.size()}, {"impostor", s.impostor.size()}};
      } else if (*ev_wer) {
        const CorpusWer r = corpus_wer(read_lines(ref_path), read_lines(hyp_path));
        j = {{"metric", "wer"}, {"rate", r.rate}, {"edits", r.edits},
             {"ref_words", r.ref_words}, {"utterances", r.utterances}};
      } else {
        const ConfusionMatrix cm = read_confusion_csv(cm_path);
        j = {{"metric", "uar"}, {"rate", uar(cm)}, {"classes", cm.size()}};
      }
      out << j.dump() << "\n";
    }
  } catch (const std::exception& e) {
    err << "streamanon: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace streamanon
