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

// Pointer-generator sequence model for concept extraction.
//
// The source is the interleaved token / PoS-tag sequence of a window, the
// target the window's concepts joined by "*". A multi-layer bidirectional
// LSTM encodes the source; a multi-layer LSTM decoder attends over it with
// two independent heads. The general head yields the context vector used by
// the vocabulary distribution and the generation probability, the copy head
// supplies the copy distribution over source positions. Each head keeps its
// own coverage vector (running sum of its past attention).

#ifndef CONEX_MODEL_H_
#define CONEX_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "conex/tensor.h"

namespace conex {

enum class AttentionKind { kAdditiveCoverage, kBilinearGeneral };

const char *AttentionKindName(AttentionKind kind);
AttentionKind ParseAttentionKind(std::string_view name);

struct ModelConfig {
  // Architecture.
  int layers = 2;
  int hidden_size = 512;
  int embedding_size = 256;
  int vocab_size = 50000;
  AttentionKind attention = AttentionKind::kAdditiveCoverage;
  // Vocabulary building.
  int min_count = 1;
  // Training.
  double coverage_loss_weight = 0.0;
  double learning_rate = 0.1;
  double lr_decay = 0.5;
  double max_grad_norm = 5.0;
  double init_scale = 0.1;
  int batch_size = 64;
  int train_steps = 20000;
  uint64_t seed = 1;
  // Windowing.
  int window = 50;
  int stride = 25;

  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json &j);
  // Architecture fields only.
  bool SameArchitecture(const ModelConfig &other) const;
};

class Vocabulary {
 public:
  static constexpr size_t kPad = 0;
  static constexpr size_t kUnk = 1;
  static constexpr size_t kBos = 2;
  static constexpr size_t kEos = 3;
  static constexpr size_t kSep = 4;
  static constexpr size_t kNumReserved = 5;
  static constexpr std::string_view kSepToken = "*";

  Vocabulary();
  // Reserved entries followed by `tokens` in order.
  explicit Vocabulary(const std::vector<std::string> &tokens);

  // Most frequent tokens (ties by byte order) with count >= min_count, up to
  // max_size entries including the reserved ones.
  static Vocabulary Build(const std::unordered_map<std::string, size_t> &counts,
                          size_t max_size, size_t min_count = 1);

  size_t size() const { return tokens_.size(); }
  std::optional<size_t> Find(std::string_view token) const;
  size_t IdOrUnk(std::string_view token) const;
  const std::string &Token(size_t id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  bool operator==(const Vocabulary &other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, size_t> index_;
};

// Per-source extension of the vocabulary with the source's OOV tokens.
class DynamicVocab {
 public:
  DynamicVocab() = default;
  DynamicVocab(const Vocabulary &vocab, const std::vector<std::string> &source);

  size_t base_size() const { return base_size_; }
  size_t extended_size() const { return base_size_ + words_.size(); }
  size_t num_extensions() const { return words_.size(); }
  // Extended id for a source OOV token.
  std::optional<size_t> Find(std::string_view token) const;
  const std::string &Word(size_t extended_id) const;

 private:
  size_t base_size_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, size_t> index_;
};

// Concept token lists -> BOS c1 * c2 * ... EOS (surface tokens).
std::vector<std::string> LinearizeTargets(
    const std::vector<std::vector<std::string>> &concepts);
// Inverse of LinearizeTargets; BOS/EOS optional.
std::vector<std::vector<std::string>> SplitTargets(
    const std::vector<std::string> &tokens);

// One source window paired with its target concepts.
struct TrainingPair {
  std::vector<std::pair<std::string, std::string>> source;  // (surface, PoS)
  std::vector<std::vector<std::string>> concepts;
};

// Source ids and targets resolved against a vocabulary.
struct EncodedExample {
  std::vector<std::string> source_tokens;  // Interleaved surfaces and tags.
  std::vector<size_t> source_ids;          // Vocabulary ids, OOV -> UNK.
  std::vector<size_t> source_ext_ids;      // Extended ids.
  DynamicVocab dyn;
  std::vector<size_t> decoder_inputs;  // BOS, y_1 ... y_{T-1} (vocab ids).
  std::vector<size_t> targets;         // y_1 ... y_T = EOS (extended ids).
  size_t unk_targets = 0;              // Target tokens mapped to UNK.
};

std::vector<std::string> InterleaveSource(
    const std::vector<std::pair<std::string, std::string>> &source);

EncodedExample EncodeExample(const Vocabulary &vocab, const TrainingPair &pair);
EncodedExample EncodeSource(const Vocabulary &vocab,
                            const std::vector<std::pair<std::string, std::string>> &source);
// Encodes an already linearized source and target concepts.
EncodedExample EncodeTokens(const Vocabulary &vocab, const std::vector<std::string> &source,
                            const std::vector<std::vector<std::string>> &concepts);

// Named learnable tensors in a fixed order.
class ParameterSet {
 public:
  Parameter &Add(const std::string &name, Shape shape);
  Parameter &Get(const std::string &name);
  const Parameter &Get(const std::string &name) const;
  bool Has(const std::string &name) const { return index_.count(name) > 0; }

  std::vector<Parameter> &all() { return params_; }
  const std::vector<Parameter> &all() const { return params_; }
  size_t size() const { return params_.size(); }

  void ZeroGrad();
  void InitUniform(double scale, uint64_t seed);
  size_t NumValues() const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, size_t> index_;
};

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double UniformUnit(std::mt19937_64 &rng);

// Decoder/attention state carried between steps.
struct StepState {
  std::vector<Var> h;  // Per decoder layer.
  std::vector<Var> c;
  Var general_coverage;
  Var copy_coverage;
};

// Everything computed for one decoder step.
struct StepOutput {
  Var s;               // Top decoder state.
  Var general_attention;
  Var copy_attention;
  Var context;         // h*_t from the general head.
  Var p_vocab;
  Var p_gen;
  Var final_dist;      // Over the extended vocabulary.
  Tensor general_coverage_before;  // c^t used at this step.
  Tensor copy_coverage_before;
};

class PointerGenerator;

// A model's parameters bound to a tape plus the encoded source.
class ForwardPass {
 public:
  ForwardPass(const PointerGenerator &model, Tape &tape, const EncodedExample &ex);

  const std::vector<Var> &encoder_states() const { return states_; }
  const StepState &initial_state() const { return initial_; }

  // One decoder step with decoder input id `input` (a vocabulary id).
  StepOutput Step(const StepState &state, size_t input, StepState *next);

  // Attention of one head for decoder state s and coverage c (Var on tape).
  std::pair<Var, Var> Attend(Var s, Var coverage, bool copy_head);
  Var VocabDistribution(Var s, Var context);
  Var GenerationProbability(Var context, Var s, Var x);
  Var FinalDistribution(Var p_vocab, Var p_gen, Var copy_attention);

  // Summed NLL over the target plus the coverage penalty when enabled.
  Var SequenceLoss(std::vector<StepOutput> *steps = nullptr);

  Tape &tape() { return tape_; }
  const EncodedExample &example() const { return ex_; }

 private:
  Var P(const char *name);
  Var P(const std::string &name);
  std::pair<Var, Var> LstmCell(const std::string &prefix, Var x, Var h, Var c);

  const PointerGenerator &model_;
  Tape &tape_;
  const EncodedExample &ex_;
  std::unordered_map<std::string, Var> bound_;
  std::vector<Var> states_;
  Var states_matrix_;      // {n, 2H}
  Var states_transposed_;  // {2H, n}
  Var general_keys_;       // W_h h_i for all i, additive mode.
  Var copy_keys_;
  Var general_bilinear_;   // W^T, bilinear mode.
  Var copy_bilinear_;
  StepState initial_;
};

struct DecodeOptions {
  int beam_width = 1;
  int max_length = 100;
};

struct DecodeResult {
  std::vector<std::string> tokens;  // Without BOS/EOS.
  double log_prob = 0.0;
  bool finished = false;
};

class PointerGenerator {
 public:
  PointerGenerator() = default;
  PointerGenerator(ModelConfig config, Vocabulary vocab);

  // Uniform(-init_scale, init_scale) initialization from config.seed.
  void Initialize();

  const ModelConfig &config() const { return config_; }
  ModelConfig &mutable_config() { return config_; }
  const Vocabulary &vocab() const { return vocab_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }
  Parameter &param(const std::string &name) const;

  size_t hidden() const { return static_cast<size_t>(config_.hidden_size); }
  size_t embedding() const { return static_cast<size_t>(config_.embedding_size); }
  size_t layers() const { return static_cast<size_t>(config_.layers); }

  // Loss of one example on a recording tape; backward not run.
  Var Loss(Tape &tape, const EncodedExample &ex) const;

  DecodeResult Decode(const std::vector<std::pair<std::string, std::string>> &source,
                      const DecodeOptions &options) const;
  DecodeResult Decode(const EncodedExample &ex, const DecodeOptions &options) const;

 private:
  void CreateParameters();

  ModelConfig config_;
  Vocabulary vocab_;
  // Parameters are bound to tapes by pointer; tapes never mutate values.
  mutable ParameterSet params_;
};

// Checkpoint = config + vocabulary + parameters + step counter.
struct ModelCheckpoint {
  PointerGenerator model;
  uint64_t step = 0;
};

inline constexpr uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const ModelCheckpoint &ckpt);
ModelCheckpoint ParseCheckpoint(std::string_view bytes);
void SaveCheckpoint(const std::string &path, const ModelCheckpoint &ckpt);
ModelCheckpoint LoadCheckpoint(const std::string &path);

}  // namespace conex

#endif  // CONEX_MODEL_H_
