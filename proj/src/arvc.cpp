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

#include "streamanon/arvc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace streamanon {
namespace {

constexpr char kSection[] = "arvc";

void check_delay(int delay) {
  if (delay < 0 || delay > kMaxDelay) {
    throw ConfigError("delay must be in [0, " + std::to_string(kMaxDelay) +
                      "], got " + std::to_string(delay));
  }
}

int argmax(const RowVec& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

// --- layout ---------------------------------------------------------------

std::vector<Slot> interleaved_slots(int frames, int delay, int prompt_frames) {
  check_delay(delay);
  if (frames < 0 || prompt_frames < 0) throw DataError("negative frame count");
  std::vector<Slot> slots;
  slots.reserve(1 + 2 * prompt_frames + 2 * frames + delay);
  slots.push_back({SlotKind::kSpeaker, -1});
  for (int i = 0; i < prompt_frames; ++i) {
    slots.push_back({SlotKind::kPromptContent, i});
    slots.push_back({SlotKind::kPromptAcoustic, i});
  }
  for (int i = 0; i < frames; ++i) {
    slots.push_back({SlotKind::kContent, i});
    if (i < delay) {
      slots.push_back({SlotKind::kWait, -1});
    } else {
      slots.push_back({SlotKind::kAcoustic, i - delay});
    }
  }
  for (int j = std::max(0, frames - delay); j < frames; ++j) {
    slots.push_back({SlotKind::kEndOfContent, -1});
    slots.push_back({SlotKind::kAcoustic, j});
  }
  return slots;
}

InterleavedSequence build_interleaved(const RowVec& speaker,
                                      std::vector<ContentToken> content,
                                      std::vector<AcousticFrame> acoustic, int delay,
                                      std::vector<ContentToken> prompt_content,
                                      std::vector<AcousticFrame> prompt_acoustic) {
  check_delay(delay);
  if (content.size() != acoustic.size()) {
    throw DataError("content/acoustic length mismatch: " + std::to_string(content.size()) +
                    " vs " + std::to_string(acoustic.size()));
  }
  if (prompt_content.size() != prompt_acoustic.size()) {
    throw DataError("prompt content/acoustic length mismatch");
  }
  InterleavedSequence seq;
  seq.delay = delay;
  seq.speaker = speaker;
  seq.slots = interleaved_slots(static_cast<int>(content.size()), delay,
                                static_cast<int>(prompt_content.size()));
  seq.content = std::move(content);
  seq.acoustic = std::move(acoustic);
  seq.prompt_content = std::move(prompt_content);
  seq.prompt_acoustic = std::move(prompt_acoustic);
  return seq;
}

bool is_valid_interleaving(const std::vector<Slot>& slots, int delay) {
  if (delay < 0 || delay > kMaxDelay) return false;
  int frames = 0, prompt = 0;
  for (const Slot& s : slots) {
    if (s.kind == SlotKind::kContent) ++frames;
    if (s.kind == SlotKind::kPromptContent) ++prompt;
  }
  return slots == interleaved_slots(frames, delay, prompt);
}

std::string describe_slots(const std::vector<Slot>& slots) {
  std::ostringstream os;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i) os << ' ';
    const Slot& s = slots[i];
    switch (s.kind) {
      case SlotKind::kSpeaker: os << 'g'; break;
      case SlotKind::kPromptContent: os << "pc" << s.index; break;
      case SlotKind::kPromptAcoustic: os << "pa" << s.index; break;
      case SlotKind::kContent: os << 'c' << s.index; break;
      case SlotKind::kWait: os << 'w'; break;
      case SlotKind::kEndOfContent: os << "eoc"; break;
      case SlotKind::kAcoustic: os << 'a' << s.index; break;
    }
  }
  return os.str();
}

int sample_delay(Rng& rng, const DelaySchedule& schedule) {
  if (schedule.mode == DelayMode::kFixed) {
    check_delay(schedule.delay);
    return schedule.delay;
  }
  return std::uniform_int_distribution<int>(1, kMaxDelay)(rng);
}

// --- config ---------------------------------------------------------------

void ArvcConfig::write(KeyValueConfig& kv) const {
  const std::string p = std::string(kSection) + ".";
  kv.set(p + "dim", std::to_string(dim));
  kv.set(p + "ffn_dim", std::to_string(ffn_dim));
  kv.set(p + "heads", std::to_string(heads));
  kv.set(p + "slow_layers", std::to_string(slow_layers));
  kv.set(p + "fast_layers", std::to_string(fast_layers));
  kv.set(p + "codebooks", std::to_string(codebooks));
  kv.set(p + "acoustic_vocab", std::to_string(acoustic_vocab));
  kv.set(p + "content_vocab", std::to_string(content_vocab));
  kv.set(p + "speaker_dim", std::to_string(speaker_dim));
  kv.set(p + "delay_mode", schedule.mode == DelayMode::kFixed ? "fixed" : "dynamic");
  kv.set(p + "delay", std::to_string(schedule.delay));
  kv.set(p + "seed", std::to_string(seed));
}

ArvcConfig ArvcConfig::read(const KeyValueConfig& kv) {
  const std::string p = std::string(kSection) + ".";
  ArvcConfig c;
  c.dim = kv.get_int(p + "dim", c.dim);
  c.ffn_dim = kv.get_int(p + "ffn_dim", c.ffn_dim);
  c.heads = kv.get_int(p + "heads", c.heads);
  c.slow_layers = kv.get_int(p + "slow_layers", c.slow_layers);
  c.fast_layers = kv.get_int(p + "fast_layers", c.fast_layers);
  c.codebooks = kv.get_int(p + "codebooks", c.codebooks);
  c.acoustic_vocab = kv.get_int(p + "acoustic_vocab", c.acoustic_vocab);
  c.content_vocab = kv.get_int(p + "content_vocab", c.content_vocab);
  c.speaker_dim = kv.get_int(p + "speaker_dim", c.speaker_dim);
  const std::string mode = kv.get_string(p + "delay_mode", "dynamic");
  if (mode == "fixed") {
    c.schedule.mode = DelayMode::kFixed;
  } else if (mode == "dynamic") {
    c.schedule.mode = DelayMode::kDynamic;
  } else {
    throw ConfigError("unknown delay_mode '" + mode + "'");
  }
  c.schedule.delay = kv.get_int(p + "delay", c.schedule.delay);
  c.seed = static_cast<std::uint64_t>(kv.get_int(p + "seed", static_cast<int>(c.seed)));
  check_delay(c.schedule.delay);
  return c;
}

// --- model ----------------------------------------------------------------

ArvcModel::ArvcModel(const ArvcConfig& config) : config_(config), rng_(config.seed) {
  if (config.codebooks < 1 || config.acoustic_vocab < 1 || config.content_vocab < 1 ||
      config.dim % (2 * config.heads) != 0) {
    throw ConfigError("invalid arvc dimensions");
  }
  const int d = config.dim;
  speaker_proj_ = Linear("arvc.speaker", config.speaker_dim, d, true, rng_);
  content_emb_ = Embedding("arvc.content", config.content_vocab, d, rng_);
  // Acoustic slots sum one embedding per codebook; keep the sum near unit scale.
  const double acoustic_scale = 1.0 / std::sqrt(static_cast<double>(config.codebooks));
  for (int k = 0; k < config.codebooks; ++k) {
    acoustic_emb_.emplace_back("arvc.acoustic" + std::to_string(k), config.acoustic_vocab, d,
                               rng_);
    acoustic_emb_.back().parameters()[0]->value *= acoustic_scale;
  }
  wait_ = Parameter("arvc.wait", init_uniform(1, d, 1.0, rng_));
  end_of_content_ = Parameter("arvc.eoc", init_uniform(1, d, 1.0, rng_));
  slow_ = Transformer("arvc.slow", config.slow_layers, d, config.ffn_dim, config.heads, rng_);
  z_proj_ = Linear("arvc.zproj", d, d, true, rng_);
  for (int k = 1; k < config.codebooks; ++k) {
    fast_emb_.emplace_back("arvc.fast_emb" + std::to_string(k), config.acoustic_vocab, d,
                           rng_);
  }
  fast_ = Transformer("arvc.fast", config.fast_layers, d, config.ffn_dim, config.heads, rng_);
  // Small head init keeps the first-step loss at n * ln(V).
  for (int k = 0; k < config.codebooks; ++k) {
    heads_.emplace_back("arvc.head" + std::to_string(k), d, config.acoustic_vocab, true, rng_,
                        0.1);
  }
}

void ArvcModel::collect(std::vector<Parameter*>& out) {
  speaker_proj_.collect(out);
  content_emb_.collect(out);
  for (auto& e : acoustic_emb_) e.collect(out);
  out.push_back(&wait_);
  out.push_back(&end_of_content_);
  slow_.collect(out);
  z_proj_.collect(out);
  for (auto& e : fast_emb_) e.collect(out);
  fast_.collect(out);
  for (auto& h : heads_) h.collect(out);
}

std::uint64_t ArvcModel::checksum() const {
  return parameter_checksum(const_cast<ArvcModel*>(this)->parameters());
}

void ArvcModel::save(Checkpoint& ck) const {
  config_.write(ck.config);
  ck.put(kSection, const_cast<ArvcModel*>(this)->parameters());
}

std::unique_ptr<ArvcModel> ArvcModel::load(const Checkpoint& ck) {
  if (!ck.has_section(kSection)) throw DataError("checkpoint has no arvc section");
  auto model = std::make_unique<ArvcModel>(ArvcConfig::read(ck.config));
  ck.get(kSection, model->parameters());
  return model;
}

void ArvcModel::check_sequence(const InterleavedSequence& seq) const {
  if (seq.speaker.size() != config_.speaker_dim) {
    throw DataError("speaker embedding has dim " + std::to_string(seq.speaker.size()) +
                    ", expected " + std::to_string(config_.speaker_dim));
  }
  if (seq.content.empty()) throw DataError("sequence has no content frames");
  auto check_tokens = [&](const std::vector<ContentToken>& tokens) {
    for (ContentToken c : tokens) {
      if (c < 0 || c >= config_.content_vocab) {
        throw DataError("content token " + std::to_string(c) + " out of range");
      }
    }
  };
  auto check_frames = [&](const std::vector<AcousticFrame>& frames) {
    for (const auto& f : frames) {
      if (static_cast<int>(f.codes.size()) != config_.codebooks) {
        throw DataError("acoustic frame has " + std::to_string(f.codes.size()) +
                        " codes, expected " + std::to_string(config_.codebooks));
      }
      for (int code : f.codes) {
        if (code < 0 || code >= config_.acoustic_vocab) {
          throw DataError("acoustic code " + std::to_string(code) + " out of range");
        }
      }
    }
  };
  check_tokens(seq.content);
  check_tokens(seq.prompt_content);
  check_frames(seq.acoustic);
  check_frames(seq.prompt_acoustic);
}

RowVec ArvcModel::embed_slot(SlotKind kind, const RowVec* speaker, int content,
                             const AcousticFrame* frame) const {
  switch (kind) {
    case SlotKind::kSpeaker:
      if (!speaker || speaker->size() != config_.speaker_dim) {
        throw DataError("speaker slot needs a " + std::to_string(config_.speaker_dim) +
                        "-dim embedding");
      }
      return speaker_proj_.step(*speaker);
    case SlotKind::kContent:
    case SlotKind::kPromptContent:
      if (content < 0 || content >= config_.content_vocab) {
        throw DataError("content token " + std::to_string(content) + " out of range");
      }
      return content_emb_.row(content);
    case SlotKind::kWait:
      return wait_.value;
    case SlotKind::kEndOfContent:
      return end_of_content_.value;
    case SlotKind::kAcoustic:
    case SlotKind::kPromptAcoustic: {
      if (!frame || static_cast<int>(frame->codes.size()) != config_.codebooks) {
        throw DataError("acoustic slot needs " + std::to_string(config_.codebooks) + " codes");
      }
      RowVec sum = RowVec::Zero(config_.dim);
      for (int k = 0; k < config_.codebooks; ++k) {
        const int code = frame->codes[k];
        if (code < 0 || code >= config_.acoustic_vocab) {
          throw DataError("acoustic code " + std::to_string(code) + " out of range");
        }
        sum += acoustic_emb_[k].row(code);
      }
      return sum;
    }
  }
  throw StateError("unknown slot kind");
}

RowVec ArvcModel::fast_input_code(int codebook, int code) const {
  return fast_emb_.at(codebook - 1).row(code);
}

RowVec ArvcModel::head_logits(int codebook, const RowVec& h) const {
  return heads_.at(codebook).step(h);
}

ArvcForward ArvcModel::forward(Tape& tape, const std::vector<InterleavedSequence>& batch) {
  if (batch.empty()) throw DataError("empty batch");
  const int n = config_.codebooks;
  const int b_count = static_cast<int>(batch.size());
  int seq_len = 0;
  for (const auto& seq : batch) {
    check_sequence(seq);
    seq_len = std::max(seq_len, static_cast<int>(seq.slots.size()));
  }

  // Source bank rows: speakers, content tokens, wait, eoc, acoustic sums.
  Tensor speakers(b_count, config_.speaker_dim);
  std::vector<int> content_ids;
  std::vector<std::vector<int>> acoustic_ids(n);
  std::vector<int> slot_source(static_cast<std::size_t>(b_count) * seq_len, -1);
  struct Pending {
    int row;
    SlotKind kind;
    int bank_index;
  };
  std::vector<Pending> pending;
  for (int b = 0; b < b_count; ++b) {
    const auto& seq = batch[b];
    speakers.row(b) = seq.speaker;
    for (int s = 0; s < static_cast<int>(seq.slots.size()); ++s) {
      const Slot& slot = seq.slots[s];
      const int row = b * seq_len + s;
      switch (slot.kind) {
        case SlotKind::kSpeaker:
          pending.push_back({row, slot.kind, b});
          break;
        case SlotKind::kContent:
        case SlotKind::kPromptContent: {
          const auto& src = slot.kind == SlotKind::kContent ? seq.content : seq.prompt_content;
          pending.push_back({row, slot.kind, static_cast<int>(content_ids.size())});
          content_ids.push_back(src.at(slot.index));
          break;
        }
        case SlotKind::kWait:
        case SlotKind::kEndOfContent:
          pending.push_back({row, slot.kind, 0});
          break;
        case SlotKind::kAcoustic:
        case SlotKind::kPromptAcoustic: {
          const auto& src =
              slot.kind == SlotKind::kAcoustic ? seq.acoustic : seq.prompt_acoustic;
          pending.push_back({row, slot.kind, static_cast<int>(acoustic_ids[0].size())});
          for (int k = 0; k < n; ++k) acoustic_ids[k].push_back(src.at(slot.index).codes[k]);
          break;
        }
      }
    }
  }
  const int content_base = b_count;
  const int wait_row = content_base + static_cast<int>(content_ids.size());
  const int eoc_row = wait_row + 1;
  const int acoustic_base = eoc_row + 1;
  for (const Pending& p : pending) {
    int src = 0;
    switch (p.kind) {
      case SlotKind::kSpeaker: src = p.bank_index; break;
      case SlotKind::kContent:
      case SlotKind::kPromptContent: src = content_base + p.bank_index; break;
      case SlotKind::kWait: src = wait_row; break;
      case SlotKind::kEndOfContent: src = eoc_row; break;
      case SlotKind::kAcoustic:
      case SlotKind::kPromptAcoustic: src = acoustic_base + p.bank_index; break;
    }
    slot_source[p.row] = src;
  }

  std::vector<Var> bank;
  bank.push_back(speaker_proj_.forward(tape, tape.constant(speakers)));
  if (!content_ids.empty()) bank.push_back(content_emb_.forward(tape, content_ids));
  bank.push_back(tape.param(wait_));
  bank.push_back(tape.param(end_of_content_));
  if (!acoustic_ids[0].empty()) {
    Var sum = acoustic_emb_[0].forward(tape, acoustic_ids[0]);
    for (int k = 1; k < n; ++k) sum = ag::add(sum, acoustic_emb_[k].forward(tape, acoustic_ids[k]));
    bank.push_back(sum);
  }
  Var slow_in = ag::gather_rows(ag::concat_rows(bank), slot_source);

  ArvcForward out;
  out.seq_len = seq_len;
  out.slow_hidden = slow_.forward(tape, slow_in, seq_len);

  // z_t is the slow output at the slot preceding each target acoustic slot.
  std::vector<int> z_rows;
  out.targets.assign(n, {});
  for (int b = 0; b < b_count; ++b) {
    const auto& seq = batch[b];
    std::vector<int> slot_of_frame(seq.acoustic.size(), -1);
    for (int s = 0; s < static_cast<int>(seq.slots.size()); ++s) {
      if (seq.slots[s].kind == SlotKind::kAcoustic) slot_of_frame[seq.slots[s].index] = s;
    }
    for (std::size_t t = 0; t < seq.acoustic.size(); ++t) {
      if (slot_of_frame[t] < 1) throw DataError("acoustic frame missing from slot layout");
      z_rows.push_back(b * seq_len + slot_of_frame[t] - 1);
      for (int k = 0; k < n; ++k) out.targets[k].push_back(seq.acoustic[t].codes[k]);
    }
  }
  const int m = static_cast<int>(z_rows.size());
  out.frames = m;
  out.latents = ag::gather_rows(out.slow_hidden, z_rows);

  // Fast inputs per frame: [proj(z_t), emb(a_t1), ..., emb(a_t,n-1)].
  std::vector<Var> fast_bank{z_proj_.forward(tape, out.latents)};
  for (int k = 1; k < n; ++k) fast_bank.push_back(fast_emb_[k - 1].forward(tape, out.targets[k - 1]));
  std::vector<int> order(static_cast<std::size_t>(m) * n);
  for (int f = 0; f < m; ++f) {
    for (int k = 0; k < n; ++k) order[static_cast<std::size_t>(f) * n + k] = k * m + f;
  }
  Var fast_in = ag::gather_rows(ag::concat_rows(fast_bank), order);
  Var fast_out = fast_.forward(tape, fast_in, n);
  for (int k = 0; k < n; ++k) {
    std::vector<int> rows(m);
    for (int f = 0; f < m; ++f) rows[f] = f * n + k;
    out.logits.push_back(heads_[k].forward(tape, ag::gather_rows(fast_out, rows)));
  }
  return out;
}

// --- loss -----------------------------------------------------------------

Var ar_loss(const std::vector<Var>& logits, const std::vector<AcousticFrame>& targets) {
  if (logits.empty()) throw DataError("no logits");
  Var total;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (logits[k].rows() != static_cast<Eigen::Index>(targets.size())) {
      throw ShapeError("logit rows do not match target frames");
    }
    std::vector<int> col(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) col[t] = targets[t].codes.at(k);
    Var term = ag::cross_entropy(logits[k], std::move(col), Reduction::kSum);
    total = k == 0 ? term : ag::add(total, term);
  }
  return total;
}

double ar_loss(const std::vector<Tensor>& logits, const std::vector<AcousticFrame>& targets) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& l : logits) vars.push_back(tape.constant(l));
  return ar_loss(vars, targets).value()(0, 0);
}

// --- generation -----------------------------------------------------------

GenSession::GenSession(const ArvcModel& model, const RowVec& speaker,
                       std::vector<ContentToken> prompt_content,
                       std::vector<AcousticFrame> prompt_acoustic, int delay,
                       DecodeOptions options)
    : model_(model),
      slow_cache_(model.slow().make_cache()),
      delay_(delay),
      options_(options),
      rng_(options.seed) {
  check_delay(delay);
  if (prompt_content.size() != prompt_acoustic.size()) {
    throw DataError("prompt content/acoustic length mismatch");
  }
  if (!options.greedy && (options.top_k < 1 || options.temperature <= 0.0)) {
    throw ConfigError("sampling needs top_k >= 1 and temperature > 0");
  }
  feed(model_.embed_slot(SlotKind::kSpeaker, &speaker, -1, nullptr));
  trace_.push_back({SlotKind::kSpeaker, -1});
  for (std::size_t i = 0; i < prompt_content.size(); ++i) {
    feed(model_.embed_slot(SlotKind::kPromptContent, nullptr, prompt_content[i], nullptr));
    feed(model_.embed_slot(SlotKind::kPromptAcoustic, nullptr, -1, &prompt_acoustic[i]));
    trace_.push_back({SlotKind::kPromptContent, static_cast<int>(i)});
    trace_.push_back({SlotKind::kPromptAcoustic, static_cast<int>(i)});
  }
}

int GenSession::pick(const RowVec& logits) {
  if (options_.greedy) return argmax(logits);
  const int v = static_cast<int>(logits.size());
  const int k = std::min(options_.top_k, v);
  std::vector<int> idx(v);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    return logits[a] > logits[b] || (logits[a] == logits[b] && a < b);
  });
  std::vector<double> p(k);
  const double top = logits[idx[0]];
  for (int i = 0; i < k; ++i) p[i] = std::exp((logits[idx[i]] - top) / options_.temperature);
  std::discrete_distribution<int> dist(p.begin(), p.end());
  return idx[dist(rng_)];
}

AcousticFrame GenSession::decode_frame(const RowVec& z) {
  const int n = model_.config().codebooks;
  TransformerCache cache = model_.fast().make_cache();
  AcousticFrame frame;
  frame.codes.reserve(n);
  std::vector<RowVec> logits;
  RowVec x = model_.fast_input_latent(z);
  for (int k = 0; k < n; ++k) {
    const RowVec h = model_.fast().step(x, cache);
    RowVec l = model_.head_logits(k, h);
    const int code = pick(l);
    frame.codes.push_back(code);
    if (record_) logits.push_back(std::move(l));
    if (k + 1 < n) x = model_.fast_input_code(k + 1, code);
  }
  if (record_) {
    latents_.push_back(z);
    logits_.push_back(std::move(logits));
  }
  return frame;
}

std::optional<AcousticFrame> GenSession::step(ContentToken token) {
  if (closed_) throw StateError("session already flushed");
  const RowVec h = feed(model_.embed_slot(SlotKind::kContent, nullptr, token, nullptr));
  trace_.push_back({SlotKind::kContent, consumed_});
  ++consumed_;
  if (consumed_ <= delay_) {
    feed(model_.embed_slot(SlotKind::kWait, nullptr, -1, nullptr));
    trace_.push_back({SlotKind::kWait, -1});
    return std::nullopt;
  }
  AcousticFrame frame = decode_frame(h);
  feed(model_.embed_slot(SlotKind::kAcoustic, nullptr, -1, &frame));
  trace_.push_back({SlotKind::kAcoustic, emitted_});
  ++emitted_;
  return frame;
}

std::vector<AcousticFrame> GenSession::flush() {
  if (closed_) throw StateError("session already flushed");
  closed_ = true;
  std::vector<AcousticFrame> out;
  while (emitted_ < consumed_) {
    const RowVec h = feed(model_.embed_slot(SlotKind::kEndOfContent, nullptr, -1, nullptr));
    trace_.push_back({SlotKind::kEndOfContent, -1});
    AcousticFrame frame = decode_frame(h);
    // The final acoustic slot has no successor; skip its slow step.
    if (emitted_ + 1 < consumed_) {
      feed(model_.embed_slot(SlotKind::kAcoustic, nullptr, -1, &frame));
    }
    trace_.push_back({SlotKind::kAcoustic, emitted_});
    ++emitted_;
    out.push_back(std::move(frame));
  }
  return out;
}

// --- training -------------------------------------------------------------

ArvcTrainer::ArvcTrainer(ArvcModel& model, FrozenDependencies frozen, AdamWOptions options,
                         std::uint64_t seed)
    : model_(model), frozen_(frozen), optimizer_(model.parameters(), options), rng_(seed) {
  if (frozen_.content) content_sum_ = frozen_.content->checksum();
  if (frozen_.codec) codec_sum_ = frozen_.codec->checksum();
}

void ArvcTrainer::verify_frozen() const {
  if (frozen_.content && frozen_.content->checksum() != content_sum_) {
    throw StateError("content encoder weights changed during converter training");
  }
  if (frozen_.codec && frozen_.codec->checksum() != codec_sum_) {
    throw StateError("acoustic codec weights changed during converter training");
  }
}

namespace {

std::vector<InterleavedSequence> to_sequences(const std::vector<ArvcExample>& batch,
                                              const std::vector<int>& delays) {
  std::vector<InterleavedSequence> seqs;
  seqs.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    seqs.push_back(build_interleaved(ex.speaker, ex.content, ex.acoustic, delays[i],
                                     ex.prompt_content, ex.prompt_acoustic));
  }
  return seqs;
}

std::vector<AcousticFrame> flat_targets(const std::vector<ArvcExample>& batch) {
  std::vector<AcousticFrame> out;
  for (const auto& ex : batch) out.insert(out.end(), ex.acoustic.begin(), ex.acoustic.end());
  return out;
}

}  // namespace

double ArvcTrainer::train_step(const std::vector<ArvcExample>& batch,
                               const DelaySchedule& schedule) {
  verify_frozen();
  std::vector<int> delays;
  for (std::size_t i = 0; i < batch.size(); ++i) delays.push_back(sample_delay(rng_, schedule));
  const auto seqs = to_sequences(batch, delays);
  Tape tape;
  ArvcForward fwd = model_.forward(tape, seqs);
  Var loss = ar_loss(fwd.logits, flat_targets(batch));
  const double per_frame = loss.value()(0, 0) / fwd.frames;
  optimizer_.zero_grad();
  tape.backward(ag::scale(loss, 1.0 / fwd.frames));
  optimizer_.step();
  return per_frame;
}

ArvcMetrics ArvcTrainer::evaluate(const std::vector<ArvcExample>& batch, int delay) {
  const auto seqs = to_sequences(batch, std::vector<int>(batch.size(), delay));
  Tape tape;
  ArvcForward fwd = model_.forward(tape, seqs);
  ArvcMetrics m;
  m.frames = fwd.frames;
  m.loss_per_frame = ar_loss(fwd.logits, flat_targets(batch)).value()(0, 0) / fwd.frames;
  long correct = 0, total = 0;
  for (std::size_t k = 0; k < fwd.logits.size(); ++k) {
    const Tensor& l = fwd.logits[k].value();
    for (Eigen::Index r = 0; r < l.rows(); ++r) {
      correct += argmax(l.row(r)) == fwd.targets[k][r];
      ++total;
    }
  }
  m.accuracy = total ? static_cast<double>(correct) / total : 0.0;
  return m;
}

}  // namespace streamanon
