// Copyright 2026 The Conex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "conex/model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "conex/annotator.h"
#include "conex/util.h"

namespace conex {

const char *AttentionKindName(AttentionKind kind) {
  return kind == AttentionKind::kAdditiveCoverage ? "additive_coverage"
                                                  : "bilinear_general";
}

AttentionKind ParseAttentionKind(std::string_view name) {
  if (name == "additive_coverage" || name == "additive") {
    return AttentionKind::kAdditiveCoverage;
  }
  if (name == "bilinear_general" || name == "general" || name == "bilinear") {
    return AttentionKind::kBilinearGeneral;
  }
  throw ConfigError(fmt::format("unknown attention kind \"{}\"", name));
}

// ---- ModelConfig -----------------------------------------------------------

void ModelConfig::Validate() const {
  auto positive = [](const char *name, double v) {
    if (!(v > 0)) throw ConfigError(fmt::format("{} must be positive, got {}", name, v));
  };
  positive("layers", layers);
  positive("hidden_size", hidden_size);
  positive("embedding_size", embedding_size);
  positive("batch_size", batch_size);
  positive("learning_rate", learning_rate);
  positive("window", window);
  positive("stride", stride);
  positive("init_scale", init_scale);
  positive("min_count", min_count);
  if (vocab_size <= static_cast<int>(Vocabulary::kNumReserved)) {
    throw ConfigError(fmt::format("vocab_size must exceed {}", Vocabulary::kNumReserved));
  }
  if (train_steps < 0) throw ConfigError("train_steps must be >= 0");
  if (coverage_loss_weight < 0) throw ConfigError("coverage_loss_weight must be >= 0");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("lr_decay must be in (0, 1]");
  if (max_grad_norm < 0) throw ConfigError("max_grad_norm must be >= 0");
}

nlohmann::json ModelConfig::ToJson() const {
  nlohmann::json j;
  j["layers"] = layers;
  j["hidden_size"] = hidden_size;
  j["embedding_size"] = embedding_size;
  j["vocab_size"] = vocab_size;
  j["attention"] = AttentionKindName(attention);
  j["min_count"] = min_count;
  j["coverage_loss_weight"] = coverage_loss_weight;
  j["learning_rate"] = learning_rate;
  j["lr_decay"] = lr_decay;
  j["max_grad_norm"] = max_grad_norm;
  j["init_scale"] = init_scale;
  j["batch_size"] = batch_size;
  j["train_steps"] = train_steps;
  j["seed"] = seed;
  j["window"] = window;
  j["stride"] = stride;
  return j;
}

ModelConfig ModelConfig::FromJson(const nlohmann::json &j) {
  ModelConfig c;
  auto get = [&](const char *key, auto &field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  try {
    get("layers", c.layers);
    get("hidden_size", c.hidden_size);
    get("embedding_size", c.embedding_size);
    get("vocab_size", c.vocab_size);
    if (j.contains("attention")) {
      c.attention = ParseAttentionKind(j.at("attention").get<std::string>());
    }
    get("min_count", c.min_count);
    get("coverage_loss_weight", c.coverage_loss_weight);
    get("learning_rate", c.learning_rate);
    get("lr_decay", c.lr_decay);
    get("max_grad_norm", c.max_grad_norm);
    get("init_scale", c.init_scale);
    get("batch_size", c.batch_size);
    get("train_steps", c.train_steps);
    get("seed", c.seed);
    get("window", c.window);
    get("stride", c.stride);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(fmt::format("bad model config: {}", e.what()));
  }
  return c;
}

bool ModelConfig::SameArchitecture(const ModelConfig &o) const {
  return layers == o.layers && hidden_size == o.hidden_size &&
         embedding_size == o.embedding_size && attention == o.attention;
}

// ---- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string> &tokens) {
  tokens_ = {"<pad>", "<unk>", "<s>", "</s>", std::string(kSepToken)};
  for (const std::string &t : tokens) {
    if (index_.count(t) > 0 || std::find(tokens_.begin(), tokens_.end(), t) != tokens_.end()) {
      continue;
    }
    tokens_.push_back(t);
  }
  for (size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::Build(const std::unordered_map<std::string, size_t> &counts,
                             size_t max_size, size_t min_count) {
  std::vector<std::pair<std::string, size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  for (const auto &[tok, n] : sorted) {
    if (tokens.size() + kNumReserved >= max_size) break;
    if (n < min_count) break;
    if (tok == kSepToken) continue;
    tokens.push_back(tok);
  }
  return Vocabulary(tokens);
}

std::optional<size_t> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t Vocabulary::IdOrUnk(std::string_view token) const {
  return Find(token).value_or(kUnk);
}

DynamicVocab::DynamicVocab(const Vocabulary &vocab,
                           const std::vector<std::string> &source)
    : base_size_(vocab.size()) {
  for (const std::string &t : source) {
    if (vocab.Find(t) || index_.count(t) > 0) continue;
    index_.emplace(t, base_size_ + words_.size());
    words_.push_back(t);
  }
}

std::optional<size_t> DynamicVocab::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string &DynamicVocab::Word(size_t extended_id) const {
  if (extended_id < base_size_ || extended_id >= extended_size()) {
    throw std::out_of_range(fmt::format("extended id {} outside [{}, {})",
                                        extended_id, base_size_, extended_size()));
  }
  return words_[extended_id - base_size_];
}

std::vector<std::string> LinearizeTargets(
    const std::vector<std::vector<std::string>> &concepts) {
  std::vector<std::string> out = {"<s>"};
  for (size_t i = 0; i < concepts.size(); ++i) {
    if (i > 0) out.emplace_back(Vocabulary::kSepToken);
    out.insert(out.end(), concepts[i].begin(), concepts[i].end());
  }
  out.emplace_back("</s>");
  return out;
}

std::vector<std::vector<std::string>> SplitTargets(const std::vector<std::string> &tokens) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  bool any = false;
  for (const std::string &t : tokens) {
    if (t == "<s>" || t == "</s>" || t == "<pad>") continue;
    any = true;
    if (t == Vocabulary::kSepToken) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(t);
    }
  }
  if (any) out.push_back(std::move(current));
  // Empty concepts arise only from malformed output ("* *").
  std::erase_if(out, [](const auto &c) { return c.empty(); });
  return out;
}

std::vector<std::string> InterleaveSource(
    const std::vector<std::pair<std::string, std::string>> &source) {
  std::vector<std::string> out;
  out.reserve(source.size() * 2);
  for (const auto &[surface, pos] : source) {
    out.push_back(surface);
    out.push_back(pos);
  }
  return out;
}

namespace {

EncodedExample EncodeSourceTokens(const Vocabulary &vocab, std::vector<std::string> tokens) {
  EncodedExample ex;
  ex.source_tokens = std::move(tokens);
  ex.dyn = DynamicVocab(vocab, ex.source_tokens);
  for (const std::string &t : ex.source_tokens) {
    ex.source_ids.push_back(vocab.IdOrUnk(t));
    auto id = vocab.Find(t);
    ex.source_ext_ids.push_back(id ? *id : *ex.dyn.Find(t));
  }
  return ex;
}

void EncodeTargets(const Vocabulary &vocab, const std::vector<std::vector<std::string>> &concepts,
                   EncodedExample *ex) {
  std::vector<std::string> target = LinearizeTargets(concepts);
  for (size_t i = 1; i < target.size(); ++i) {
    const std::string &t = target[i];
    size_t id;
    if (auto v = vocab.Find(t)) {
      id = *v;
    } else if (auto d = ex->dyn.Find(t)) {
      id = *d;
    } else {
      id = Vocabulary::kUnk;
      ++ex->unk_targets;
    }
    ex->targets.push_back(id);
  }
  ex->decoder_inputs.push_back(Vocabulary::kBos);
  for (size_t i = 0; i + 1 < ex->targets.size(); ++i) {
    size_t id = ex->targets[i];
    ex->decoder_inputs.push_back(id < vocab.size() ? id : Vocabulary::kUnk);
  }
}

}  // namespace

EncodedExample EncodeSource(const Vocabulary &vocab,
                            const std::vector<std::pair<std::string, std::string>> &source) {
  return EncodeSourceTokens(vocab, InterleaveSource(source));
}

EncodedExample EncodeTokens(const Vocabulary &vocab, const std::vector<std::string> &source,
                            const std::vector<std::vector<std::string>> &concepts) {
  EncodedExample ex = EncodeSourceTokens(vocab, source);
  EncodeTargets(vocab, concepts, &ex);
  return ex;
}

EncodedExample EncodeExample(const Vocabulary &vocab, const TrainingPair &pair) {
  EncodedExample ex = EncodeSource(vocab, pair.source);
  EncodeTargets(vocab, pair.concepts, &ex);
  return ex;
}

// ---- ParameterSet ----------------------------------------------------------

Parameter &ParameterSet::Add(const std::string &name, Shape shape) {
  if (index_.count(name) > 0) {
    throw std::logic_error(fmt::format("duplicate parameter {}", name));
  }
  index_.emplace(name, params_.size());
  params_.emplace_back(name, Tensor(std::move(shape)));
  return params_.back();
}

Parameter &ParameterSet::Get(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range(fmt::format("no parameter {}", name));
  return params_[it->second];
}

const Parameter &ParameterSet::Get(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range(fmt::format("no parameter {}", name));
  return params_[it->second];
}

void ParameterSet::ZeroGrad() {
  for (Parameter &p : params_) p.ZeroGrad();
}

double UniformUnit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void ParameterSet::InitUniform(double scale, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (Parameter &p : params_) {
    for (double &v : p.value.data()) v = (2.0 * UniformUnit(rng) - 1.0) * scale;
  }
}

size_t ParameterSet::NumValues() const {
  size_t n = 0;
  for (const Parameter &p : params_) n += p.value.size();
  return n;
}

// ---- PointerGenerator ------------------------------------------------------

PointerGenerator::PointerGenerator(ModelConfig config, Vocabulary vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.Validate();
  CreateParameters();
}

void PointerGenerator::CreateParameters() {
  const size_t H = hidden(), E = embedding(), V = vocab_.size();
  params_ = ParameterSet();
  params_.Add("embedding", {V, E});
  for (size_t l = 0; l < layers(); ++l) {
    const size_t in = l == 0 ? E : 2 * H;
    for (const char *dir : {"fwd", "bwd"}) {
      params_.Add(fmt::format("enc.l{}.{}.W", l, dir), {4 * H, in + H});
      params_.Add(fmt::format("enc.l{}.{}.b", l, dir), {4 * H});
    }
  }
  for (size_t l = 0; l < layers(); ++l) {
    const size_t in = l == 0 ? E : H;
    params_.Add(fmt::format("dec.l{}.W", l), {4 * H, in + H});
    params_.Add(fmt::format("dec.l{}.b", l), {4 * H});
    params_.Add(fmt::format("bridge.l{}.h.W", l), {H, 2 * H});
    params_.Add(fmt::format("bridge.l{}.h.b", l), {H});
    params_.Add(fmt::format("bridge.l{}.c.W", l), {H, 2 * H});
    params_.Add(fmt::format("bridge.l{}.c.b", l), {H});
  }
  for (const char *head : {"attn", "copy_attn"}) {
    if (config_.attention == AttentionKind::kAdditiveCoverage) {
      params_.Add(fmt::format("{}.v", head), {H});
      params_.Add(fmt::format("{}.W_h", head), {H, 2 * H});
      params_.Add(fmt::format("{}.W_s", head), {H, H});
      params_.Add(fmt::format("{}.w_c", head), {H});
      params_.Add(fmt::format("{}.b", head), {H});
    } else {
      params_.Add(fmt::format("{}.W", head), {H, 2 * H});
    }
  }
  params_.Add("out.V", {H, 3 * H});
  params_.Add("out.b", {H});
  params_.Add("out.V2", {V, H});
  params_.Add("out.b2", {V});
  params_.Add("pgen.w_h", {1, 2 * H});
  params_.Add("pgen.w_s", {1, H});
  params_.Add("pgen.w_x", {1, E});
  params_.Add("pgen.b", {1});
}

void PointerGenerator::Initialize() {
  params_.InitUniform(config_.init_scale, config_.seed);
}

Parameter &PointerGenerator::param(const std::string &name) const {
  return params_.Get(name);
}

Var PointerGenerator::Loss(Tape &tape, const EncodedExample &ex) const {
  ForwardPass fp(*this, tape, ex);
  return fp.SequenceLoss();
}

DecodeResult PointerGenerator::Decode(
    const std::vector<std::pair<std::string, std::string>> &source,
    const DecodeOptions &options) const {
  return Decode(EncodeSource(vocab_, source), options);
}

DecodeResult PointerGenerator::Decode(const EncodedExample &ex,
                                      const DecodeOptions &options) const {
  const size_t width = static_cast<size_t>(std::max(options.beam_width, 1));
  Tape tape(false);
  ForwardPass fp(*this, tape, ex);

  struct Hypothesis {
    StepState state;
    size_t input = Vocabulary::kBos;
    std::vector<size_t> ids;
    double log_prob = 0.0;
  };
  struct Candidate {
    size_t hyp;
    size_t id;
    double log_prob;
    StepState state;
  };
  std::vector<Hypothesis> alive(1);
  alive[0].state = fp.initial_state();
  std::vector<Hypothesis> finished;

  for (int step = 0; step < options.max_length && !alive.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (size_t hi = 0; hi < alive.size(); ++hi) {
      StepState next;
      StepOutput out = fp.Step(alive[hi].state, alive[hi].input, &next);
      const Tensor &p = out.final_dist.value();
      // Top `width` ids, highest probability first, lowest id on ties.
      std::vector<size_t> order;
      for (size_t id = 0; id < p.size(); ++id) {
        if (id == Vocabulary::kPad || id == Vocabulary::kBos) continue;
        order.push_back(id);
      }
      const size_t k = std::min(width, order.size());
      std::partial_sort(order.begin(), order.begin() + k, order.end(),
                        [&](size_t a, size_t b) {
                          if (p[a] != p[b]) return p[a] > p[b];
                          return a < b;
                        });
      for (size_t r = 0; r < k; ++r) {
        candidates.push_back(Candidate{hi, order[r],
                                       alive[hi].log_prob + std::log(p[order[r]]),
                                       next});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate &a, const Candidate &b) {
                       return a.log_prob > b.log_prob;
                     });
    std::vector<Hypothesis> next_alive;
    for (Candidate &c : candidates) {
      if (next_alive.size() + finished.size() >= width) break;
      Hypothesis h;
      h.ids = alive[c.hyp].ids;
      h.log_prob = c.log_prob;
      if (c.id == Vocabulary::kEos) {
        finished.push_back(std::move(h));
        continue;
      }
      h.ids.push_back(c.id);
      h.input = c.id < vocab_.size() ? c.id : Vocabulary::kUnk;
      h.state = std::move(c.state);
      next_alive.push_back(std::move(h));
    }
    alive = std::move(next_alive);
    if (finished.size() >= width) break;
  }

  DecodeResult result;
  const std::vector<Hypothesis> &pool = finished.empty() ? alive : finished;
  if (pool.empty()) return result;
  const Hypothesis *best = &pool[0];
  for (const Hypothesis &h : pool) {
    if (h.log_prob > best->log_prob) best = &h;
  }
  result.finished = !finished.empty();
  result.log_prob = best->log_prob;
  for (size_t id : best->ids) {
    result.tokens.push_back(id < vocab_.size() ? vocab_.Token(id) : ex.dyn.Word(id));
  }
  return result;
}

// ---- ForwardPass -----------------------------------------------------------

Var ForwardPass::P(const std::string &name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = tape_.Param(&model_.param(name));
  bound_.emplace(name, v);
  return v;
}

Var ForwardPass::P(const char *name) { return P(std::string(name)); }

std::pair<Var, Var> ForwardPass::LstmCell(const std::string &prefix, Var x, Var h,
                                          Var c) {
  const size_t H = model_.hidden();
  Var z = Add(MatMul(P(prefix + ".W"), Concat({x, h})), P(prefix + ".b"));
  Var in = Sigmoid(Slice(z, 0, H));
  Var forget = Sigmoid(Slice(z, H, H));
  Var cand = Tanh(Slice(z, 2 * H, H));
  Var out = Sigmoid(Slice(z, 3 * H, H));
  Var c_next = Add(Mul(forget, c), Mul(in, cand));
  Var h_next = Mul(out, Tanh(c_next));
  return {h_next, c_next};
}

ForwardPass::ForwardPass(const PointerGenerator &model, Tape &tape,
                         const EncodedExample &ex)
    : model_(model), tape_(tape), ex_(ex) {
  const size_t n = ex.source_ids.size();
  if (n == 0) throw std::invalid_argument("cannot encode an empty source sequence");
  const size_t H = model.hidden();
  Var emb = P("embedding");
  Var zero = tape_.Constant(Tensor({H}));

  std::vector<Var> inputs;
  inputs.reserve(n);
  for (size_t id : ex.source_ids) inputs.push_back(EmbeddingLookup(emb, id));

  for (size_t l = 0; l < model.layers(); ++l) {
    std::vector<Var> fwd(n), bwd(n);
    Var h = zero, c = zero;
    const std::string fp = fmt::format("enc.l{}.fwd", l);
    for (size_t i = 0; i < n; ++i) {
      std::tie(h, c) = LstmCell(fp, inputs[i], h, c);
      fwd[i] = h;
    }
    Var fwd_h = h, fwd_c = c;
    h = zero;
    c = zero;
    const std::string bp = fmt::format("enc.l{}.bwd", l);
    for (size_t i = n; i-- > 0;) {
      std::tie(h, c) = LstmCell(bp, inputs[i], h, c);
      bwd[i] = h;
    }
    Var final_h = Concat({fwd_h, h});
    Var final_c = Concat({fwd_c, c});
    initial_.h.push_back(Tanh(Add(MatMul(P(fmt::format("bridge.l{}.h.W", l)), final_h),
                                  P(fmt::format("bridge.l{}.h.b", l)))));
    initial_.c.push_back(Add(MatMul(P(fmt::format("bridge.l{}.c.W", l)), final_c),
                             P(fmt::format("bridge.l{}.c.b", l))));
    std::vector<Var> outputs(n);
    for (size_t i = 0; i < n; ++i) outputs[i] = Concat({fwd[i], bwd[i]});
    inputs = std::move(outputs);
  }
  states_ = std::move(inputs);
  states_matrix_ = Stack(states_);
  states_transposed_ = Transpose(states_matrix_);
  if (model.config().attention == AttentionKind::kAdditiveCoverage) {
    general_keys_ = MatMul(states_matrix_, Transpose(P("attn.W_h")));
    copy_keys_ = MatMul(states_matrix_, Transpose(P("copy_attn.W_h")));
  } else {
    general_bilinear_ = Transpose(P("attn.W"));
    copy_bilinear_ = Transpose(P("copy_attn.W"));
  }
  Var zero_cov = tape_.Constant(Tensor({n}));
  initial_.general_coverage = zero_cov;
  initial_.copy_coverage = zero_cov;
}

std::pair<Var, Var> ForwardPass::Attend(Var s, Var coverage, bool copy_head) {
  Var scores;
  if (model_.config().attention == AttentionKind::kAdditiveCoverage) {
    const char *head = copy_head ? "copy_attn" : "attn";
    Var query = Add(MatMul(P(fmt::format("{}.W_s", head)), s),
                    P(fmt::format("{}.b", head)));
    Var pre = Add(copy_head ? copy_keys_ : general_keys_, query);
    pre = Add(pre, Outer(coverage, P(fmt::format("{}.w_c", head))));
    scores = MatMul(Tanh(pre), P(fmt::format("{}.v", head)));
  } else {
    Var projected = MatMul(copy_head ? copy_bilinear_ : general_bilinear_, s);
    scores = MatMul(states_matrix_, projected);
  }
  Var attention = Softmax(scores);
  Var context = MatMul(states_transposed_, attention);
  return {attention, context};
}

Var ForwardPass::VocabDistribution(Var s, Var context) {
  Var hidden = Add(MatMul(P("out.V"), Concat({s, context})), P("out.b"));
  Var logits = Add(MatMul(P("out.V2"), hidden), P("out.b2"));
  return Softmax(logits);
}

Var ForwardPass::GenerationProbability(Var context, Var s, Var x) {
  Var z = Add(MatMul(P("pgen.w_h"), context), MatMul(P("pgen.w_s"), s));
  z = Add(z, MatMul(P("pgen.w_x"), x));
  return Sigmoid(Add(z, P("pgen.b")));
}

Var ForwardPass::FinalDistribution(Var p_vocab, Var p_gen, Var copy_attention) {
  if (copy_attention.size() != ex_.source_ext_ids.size()) {
    throw ShapeError("copy attention length differs from the source length");
  }
  for (size_t id : ex_.source_ext_ids) {
    if (id >= ex_.dyn.extended_size()) {
      throw std::logic_error(fmt::format("source id {} outside extended vocabulary of {}",
                                         id, ex_.dyn.extended_size()));
    }
  }
  Var generated = PadZeros(ScaleBy(p_vocab, p_gen), ex_.dyn.num_extensions());
  Var copied = ScaleBy(copy_attention, OneMinus(p_gen));
  return ScatterAdd(generated, ex_.source_ext_ids, copied);
}

StepOutput ForwardPass::Step(const StepState &state, size_t input, StepState *next) {
  StepOutput out;
  Var x = EmbeddingLookup(P("embedding"), input);
  Var layer_in = x;
  next->h.clear();
  next->c.clear();
  for (size_t l = 0; l < model_.layers(); ++l) {
    auto [h, c] = LstmCell(fmt::format("dec.l{}", l), layer_in, state.h[l], state.c[l]);
    next->h.push_back(h);
    next->c.push_back(c);
    layer_in = h;
  }
  out.s = layer_in;
  out.general_coverage_before = state.general_coverage.value();
  out.copy_coverage_before = state.copy_coverage.value();
  std::tie(out.general_attention, out.context) =
      Attend(out.s, state.general_coverage, false);
  out.copy_attention = Attend(out.s, state.copy_coverage, true).first;
  out.p_vocab = VocabDistribution(out.s, out.context);
  out.p_gen = GenerationProbability(out.context, out.s, x);
  out.final_dist = FinalDistribution(out.p_vocab, out.p_gen, out.copy_attention);
  next->general_coverage = Add(state.general_coverage, out.general_attention);
  next->copy_coverage = Add(state.copy_coverage, out.copy_attention);
  return out;
}

Var ForwardPass::SequenceLoss(std::vector<StepOutput> *steps) {
  const double lambda = model_.config().coverage_loss_weight;
  StepState state = initial_;
  Var total;
  for (size_t t = 0; t < ex_.targets.size(); ++t) {
    StepState next;
    StepOutput out = Step(state, ex_.decoder_inputs[t], &next);
    Var loss = NegativeLogLikelihood(out.final_dist, ex_.targets[t]);
    if (lambda > 0) {
      Var penalty = Add(Sum(Minimum(out.general_attention, state.general_coverage)),
                        Sum(Minimum(out.copy_attention, state.copy_coverage)));
      loss = Add(loss, Scale(penalty, lambda));
    }
    total = total.valid() ? Add(total, loss) : loss;
    if (steps != nullptr) steps->push_back(std::move(out));
    state = std::move(next);
  }
  if (!total.valid()) total = tape_.Constant(Tensor::Scalar(0.0));
  return total;
}

}  // namespace conex
