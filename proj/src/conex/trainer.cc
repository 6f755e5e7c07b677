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

#include "conex/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "conex/annotator.h"
#include "conex/util.h"

namespace conex {

std::unordered_map<std::string, size_t> CountTokens(const std::vector<TrainingPair> &pairs) {
  std::unordered_map<std::string, size_t> counts;
  for (const TrainingPair &p : pairs) {
    for (const auto &[surface, pos] : p.source) {
      ++counts[surface];
      ++counts[pos];
    }
    for (const auto &c : p.concepts) {
      for (const std::string &t : c) ++counts[t];
    }
  }
  return counts;
}

std::vector<uint64_t> CheckpointSteps(uint64_t steps) {
  if (steps == 0) return {0};
  std::vector<uint64_t> out;
  for (uint64_t k = 1; k <= 10; ++k) {
    uint64_t s = static_cast<uint64_t>(std::llround(static_cast<double>(k * steps) / 10.0));
    if (s == 0) continue;
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

Trainer::Trainer(PointerGenerator model, const std::vector<TrainingPair> &train,
                 const std::vector<TrainingPair> &validation)
    : model_(std::move(model)),
      rng_(model_.config().seed ^ 0x9e3779b97f4a7c15ULL),
      lr_(model_.config().learning_rate) {
  for (const TrainingPair &p : train) {
    if (p.source.empty()) continue;
    train_.push_back(EncodeExample(model_.vocab(), p));
    unk_targets_ += train_.back().unk_targets;
  }
  for (const TrainingPair &p : validation) {
    if (p.source.empty()) continue;
    validation_.push_back(EncodeExample(model_.vocab(), p));
  }
  if (unk_targets_ > 0) {
    Log(LogLevel::kInfo, "{} target tokens mapped to <unk>", unk_targets_);
  }
}

std::vector<size_t> Trainer::NextBatch() {
  std::vector<size_t> batch;
  const size_t want = static_cast<size_t>(model_.config().batch_size);
  while (batch.size() < want) {
    if (cursor_ == order_.size()) {
      order_.resize(train_.size());
      std::iota(order_.begin(), order_.end(), size_t{0});
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

double Trainer::Step() {
  if (train_.empty()) throw ConfigError("no training pairs");
  std::vector<size_t> batch = NextBatch();
  ParameterSet &params = model_.params();
  params.ZeroGrad();
  size_t tokens = 0;
  for (size_t i : batch) tokens += train_[i].targets.size();
  const double norm = 1.0 / static_cast<double>(std::max<size_t>(tokens, 1));
  double loss_sum = 0.0;
  try {
    for (size_t i : batch) {
      Tape tape;
      Var loss = model_.Loss(tape, train_[i]);
      loss_sum += loss.value().item();
      tape.Backward(Scale(loss, norm));
    }
  } catch (const NumericError &e) {
    throw DivergedError(fmt::format("step {}: {}", step_ + 1, e.what()));
  }
  if (!std::isfinite(loss_sum)) {
    throw DivergedError(fmt::format("step {}: loss is not finite", step_ + 1));
  }
  double sq = 0.0;
  for (const Parameter &p : params.all()) {
    for (double g : p.grad.data()) sq += g * g;
  }
  const double gnorm = std::sqrt(sq);
  if (!std::isfinite(gnorm)) {
    throw DivergedError(fmt::format("step {}: gradient is not finite", step_ + 1));
  }
  double scale = lr_;
  const double max_norm = model_.config().max_grad_norm;
  if (max_norm > 0 && gnorm > max_norm) scale *= max_norm / gnorm;
  for (Parameter &p : params.all()) {
    auto v = p.value.data();
    auto g = p.grad.data();
    for (size_t k = 0; k < v.size(); ++k) v[k] -= scale * g[k];
  }
  ++step_;
  return loss_sum * norm;
}

double Trainer::MeanLoss(const std::vector<EncodedExample> &examples) const {
  double sum = 0.0;
  size_t tokens = 0;
  for (const EncodedExample &ex : examples) {
    Tape tape(false);
    sum += model_.Loss(tape, ex).value().item();
    tokens += ex.targets.size();
  }
  return tokens == 0 ? 0.0 : sum / static_cast<double>(tokens);
}

double Trainer::ValidationLoss() const { return MeanLoss(validation_); }

TrainResult Train(const ModelConfig &config, const std::vector<TrainingPair> &train,
                  const std::vector<TrainingPair> &validation,
                  const PointerGenerator *init, const TrainOptions &options) {
  config.Validate();
  if (options.selection == SelectionMetric::kDevF1 && !options.dev_f1) {
    throw ConfigError("dev-F1 selection needs a scoring function");
  }
  PointerGenerator model;
  if (init != nullptr) {
    if (!init->config().SameArchitecture(config)) {
      throw ConfigError("initial checkpoint architecture differs from the config");
    }
    model = PointerGenerator(config, init->vocab());
    for (Parameter &p : model.params().all()) p.value = init->params().Get(p.name).value;
  } else {
    model = PointerGenerator(
        config, Vocabulary::Build(CountTokens(train), static_cast<size_t>(config.vocab_size),
                                  static_cast<size_t>(config.min_count)));
    model.Initialize();
  }

  Trainer trainer(std::move(model), train, validation);
  TrainResult result;
  result.unk_targets = trainer.unk_targets();
  const bool have_validation = !validation.empty();
  double best_validation = std::numeric_limits<double>::infinity();
  double best_score = -std::numeric_limits<double>::infinity();
  double loss_since = 0.0;
  size_t steps_since = 0;

  auto emit = [&](uint64_t step) {
    CheckpointRecord rec;
    rec.step = step;
    rec.train_loss = steps_since > 0 ? loss_since / static_cast<double>(steps_since)
                                     : trainer.MeanLoss(trainer.train_examples());
    rec.validation_loss = have_validation ? trainer.ValidationLoss() : rec.train_loss;
    if (options.dev_f1) rec.dev_f1 = options.dev_f1(trainer.model());
    if (rec.validation_loss < best_validation) {
      best_validation = rec.validation_loss;
    } else {
      trainer.set_learning_rate(trainer.learning_rate() * config.lr_decay);
    }
    rec.learning_rate = trainer.learning_rate();
    loss_since = 0.0;
    steps_since = 0;

    ModelCheckpoint ckpt{trainer.model(), step};
    double score = options.selection == SelectionMetric::kDevF1 ? *rec.dev_f1
                                                                : -rec.validation_loss;
    if (result.checkpoints.empty() || score > best_score) {
      best_score = score;
      result.best = ckpt;
      result.best_index = result.checkpoints.size();
    }
    result.checkpoints.push_back(rec);
    Log(LogLevel::kInfo, "step {}: train {:.6f} validation {:.6f} lr {:g}", step,
        rec.train_loss, rec.validation_loss, rec.learning_rate);
    if (options.sink) options.sink(ckpt, rec);
    result.last = std::move(ckpt);
  };

  std::vector<uint64_t> marks = CheckpointSteps(static_cast<uint64_t>(config.train_steps));
  size_t next_mark = 0;
  if (marks.front() == 0) emit(0);
  for (uint64_t s = 1; s <= static_cast<uint64_t>(config.train_steps); ++s) {
    double loss = trainer.Step();
    result.loss_curve.push_back(loss);
    loss_since += loss;
    ++steps_since;
    while (next_mark < marks.size() && marks[next_mark] < s) ++next_mark;
    if (next_mark < marks.size() && marks[next_mark] == s) emit(s);
  }
  return result;
}

}  // namespace conex
