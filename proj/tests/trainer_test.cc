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

#include "conex/annotator.h"
#include "conex/pipeline.h"
#include "conex/trainer.h"
#include "doctest.h"
#include "test_util.h"

namespace conex {
namespace {

TrainingPair PresidentPair() {
  return TrainingPair{{{"The", "DT"}, {"President", "NNP"}, {"is", "VBZ"}, {"elected", "VBN"},
                       {"by", "IN"}, {"a", "DT"}, {"direct", "JJ"}, {"vote", "NN"}},
                      {{"President"}, {"direct", "vote"}}};
}

ModelConfig FastConfig(int steps) {
  ModelConfig c = testing::TinyConfig(1, 16, 12);
  c.init_scale = 0.1;
  c.learning_rate = 1.0;
  c.lr_decay = 1.0;
  c.batch_size = 1;
  c.train_steps = steps;
  c.seed = 5;
  return c;
}

TEST_CASE("checkpoint schedule") {
  CHECK(CheckpointSteps(0) == std::vector<uint64_t>{0});
  CHECK(CheckpointSteps(3) == std::vector<uint64_t>{1, 2, 3});
  CHECK(CheckpointSteps(100) ==
        std::vector<uint64_t>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
  for (uint64_t s = 1; s < 300; ++s) {
    std::vector<uint64_t> m = CheckpointSteps(s);
    CHECK(m.back() == s);
    CHECK(std::is_sorted(m.begin(), m.end()));
    CHECK(std::adjacent_find(m.begin(), m.end()) == m.end());
  }
}

TEST_CASE("zero steps keeps the initialization") {
  ModelConfig c = FastConfig(0);
  TrainResult r = Train(c, {PresidentPair()}, {});
  REQUIRE(r.checkpoints.size() == 1);
  PointerGenerator fresh(c, r.best.model.vocab());
  fresh.Initialize();
  for (const Parameter &p : fresh.params().all()) {
    CHECK(r.best.model.params().Get(p.name).value == p.value);
  }
}

TEST_CASE("training is deterministic and lowers the loss") {
  ModelConfig c = FastConfig(40);
  TrainResult a = Train(c, {PresidentPair()}, {});
  TrainResult b = Train(c, {PresidentPair()}, {});
  CHECK(SerializeCheckpoint(a.last) == SerializeCheckpoint(b.last));
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  CHECK(a.checkpoints.size() == 10);
  c.seed = 6;
  TrainResult other = Train(c, {PresidentPair()}, {});
  CHECK(SerializeCheckpoint(other.last) != SerializeCheckpoint(a.last));
}

TEST_CASE("overfit model reproduces its target") {
  TrainResult r = Train(FastConfig(150), {PresidentPair()}, {});
  DecodeResult d = r.best.model.Decode(PresidentPair().source, DecodeOptions{3, 20});
  CHECK(d.tokens == std::vector<std::string>{"President", "*", "direct", "vote"});
  std::string text = "The President is elected by a direct vote";
  Document doc = MakeDocument("p", text, TokenizeAndTag(text));
  Document x = Extract(r.best.model, doc, ExtractOptions{});
  CHECK(x.sentences[0].concepts == std::vector<Span>{{1, 2, {}}, {6, 8, {}}});
}

TEST_CASE("fine-tuning keeps the vocabulary and checks architecture") {
  TrainResult base = Train(FastConfig(5), {PresidentPair()}, {});
  ModelConfig c = FastConfig(5);
  TrainResult tuned = Train(c, {{{{"x", "NN"}}, {{"x"}}}}, {}, &base.last.model);
  CHECK(tuned.last.model.vocab() == base.last.model.vocab());
  c.hidden_size = 10;
  CHECK_THROWS_AS(Train(c, {PresidentPair()}, {}, &base.last.model), ConfigError);
}

TEST_CASE("selection and learning-rate decay") {
  ModelConfig c = FastConfig(20);
  c.lr_decay = 0.5;
  TrainOptions opt;
  int calls = 0;
  opt.selection = SelectionMetric::kDevF1;
  opt.dev_f1 = [&](const PointerGenerator &) { return ++calls == 3 ? 1.0 : 0.0; };
  TrainResult r = Train(c, {PresidentPair()}, {PresidentPair()}, nullptr, opt);
  CHECK(r.best_index == 2);
  CHECK(r.best.step == 6);
  for (size_t i = 1; i < r.checkpoints.size(); ++i) {
    const CheckpointRecord &prev = r.checkpoints[i - 1], &cur = r.checkpoints[i];
    double best = prev.validation_loss;
    for (size_t k = 0; k < i; ++k) best = std::min(best, r.checkpoints[k].validation_loss);
    double expect = cur.validation_loss < best ? prev.learning_rate : prev.learning_rate * 0.5;
    CHECK(cur.learning_rate == doctest::Approx(expect));
  }
  opt.dev_f1 = nullptr;
  CHECK_THROWS_AS(Train(c, {PresidentPair()}, {}, nullptr, opt), ConfigError);
}

TEST_CASE("divergence is reported") {
  ModelConfig c = FastConfig(3);
  c.learning_rate = 1e300;
  c.max_grad_norm = 0.0;
  c.init_scale = 1e150;
  CHECK_THROWS_AS(Train(c, {PresidentPair()}, {}), DivergedError);
}

}  // namespace
}  // namespace conex
