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

// Mini-batch SGD training of a PointerGenerator with periodic checkpoints.

#ifndef CONEX_TRAINER_H_
#define CONEX_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "conex/model.h"

namespace conex {

// Training produced a non-finite loss or parameter.
class DivergedError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct CheckpointRecord {
  uint64_t step = 0;
  double train_loss = 0.0;       // Mean per-token loss since the previous checkpoint.
  double validation_loss = 0.0;  // Per-token loss on the held-out pairs.
  double learning_rate = 0.0;    // Rate in effect after this checkpoint.
  std::optional<double> dev_f1;
};

// Receives every emitted checkpoint in step order.
using CheckpointSink =
    std::function<void(const ModelCheckpoint &, const CheckpointRecord &)>;

enum class SelectionMetric { kValidationLoss, kDevF1 };

struct TrainOptions {
  SelectionMetric selection = SelectionMetric::kValidationLoss;
  // Required for kDevF1.
  std::function<double(const PointerGenerator &)> dev_f1;
  CheckpointSink sink;
};

struct TrainResult {
  ModelCheckpoint best;
  ModelCheckpoint last;
  std::vector<CheckpointRecord> checkpoints;
  size_t best_index = 0;
  // Per-step mean per-token training loss.
  std::vector<double> loss_curve;
  size_t unk_targets = 0;
};

// Token counts over sources and targets, the input to Vocabulary::Build.
std::unordered_map<std::string, size_t> CountTokens(const std::vector<TrainingPair> &pairs);

// round(k * steps / 10) for k = 1..10, deduplicated; {0} when steps == 0.
std::vector<uint64_t> CheckpointSteps(uint64_t steps);

class Trainer {
 public:
  Trainer(PointerGenerator model, const std::vector<TrainingPair> &train,
          const std::vector<TrainingPair> &validation);

  // One SGD update on the next batch; returns its mean per-token loss.
  // Throws DivergedError.
  double Step();
  double ValidationLoss() const;
  // Mean per-token loss of the examples under the current parameters.
  double MeanLoss(const std::vector<EncodedExample> &examples) const;

  PointerGenerator &model() { return model_; }
  uint64_t step() const { return step_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  size_t unk_targets() const { return unk_targets_; }
  const std::vector<EncodedExample> &train_examples() const { return train_; }

 private:
  std::vector<size_t> NextBatch();

  PointerGenerator model_;
  std::vector<EncodedExample> train_;
  std::vector<EncodedExample> validation_;
  std::mt19937_64 rng_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  uint64_t step_ = 0;
  double lr_ = 0.0;
  size_t unk_targets_ = 0;
};

// Builds the vocabulary from `train` (or reuses init's), initializes or
// copies parameters, runs config.train_steps updates and emits checkpoints.
// With `init`, its architecture must match `config`. A divergence is
// rethrown after the sink has seen every good checkpoint.
TrainResult Train(const ModelConfig &config, const std::vector<TrainingPair> &train,
                  const std::vector<TrainingPair> &validation,
                  const PointerGenerator *init = nullptr,
                  const TrainOptions &options = {});

}  // namespace conex

#endif  // CONEX_TRAINER_H_
