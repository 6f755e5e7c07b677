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

#include <chrono>
#include <cmath>
#include <numeric>

#include "conex/annotator.h"
#include "conex/model.h"
#include "doctest.h"
#include "test_util.h"

namespace conex {
namespace {

using testing::ModelGradCheck;
using testing::SyntheticVocab;
using testing::TinyConfig;

double SumOf(const Tensor &t) {
  return std::accumulate(t.data().begin(), t.data().end(), 0.0);
}

PointerGenerator TinyModel(AttentionKind kind = AttentionKind::kAdditiveCoverage,
                           uint64_t seed = 7) {
  ModelConfig c = TinyConfig();
  c.attention = kind;
  c.seed = seed;
  c.coverage_loss_weight = 0.5;
  PointerGenerator m(c, SyntheticVocab(12));
  m.Initialize();
  return m;
}

TEST_CASE("vocabulary reserves special ids and orders by count") {
  Vocabulary v = Vocabulary::Build({{"b", 3}, {"a", 3}, {"c", 5}, {"d", 1}, {"*", 9}}, 8, 2);
  CHECK(v.Token(Vocabulary::kPad) == "<pad>");
  CHECK(v.Token(Vocabulary::kSep) == "*");
  CHECK(v.size() == 8);
  CHECK(v.Token(5) == "c");
  CHECK(v.Token(6) == "a");
  CHECK(v.Token(7) == "b");
  CHECK(!v.Find("d"));
  CHECK(v.IdOrUnk("zzz") == Vocabulary::kUnk);
}

TEST_CASE("dynamic vocabulary extends with unique source OOV tokens") {
  Vocabulary v = SyntheticVocab(7);
  DynamicVocab d(v, {"w0", "x", "y", "x", "w1"});
  CHECK(d.num_extensions() == 2);
  CHECK(*d.Find("x") == 7);
  CHECK(*d.Find("y") == 8);
  CHECK(d.Word(8) == "y");
  CHECK_THROWS(d.Word(3));
}

TEST_CASE("targets linearize and split back") {
  std::vector<std::vector<std::string>> c = {{"President"}, {"direct", "vote"}};
  std::vector<std::string> lin = LinearizeTargets(c);
  CHECK(lin == std::vector<std::string>{"<s>", "President", "*", "direct", "vote", "</s>"});
  CHECK(SplitTargets(lin) == c);
  CHECK(LinearizeTargets({}) == std::vector<std::string>{"<s>", "</s>"});
  CHECK(SplitTargets(LinearizeTargets({})).empty());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::string>> x(rng() % 5);
    for (auto &concept_tokens : x) {
      concept_tokens.resize(1 + rng() % 3);
      for (auto &t : concept_tokens) t = "t" + std::to_string(rng() % 10);
    }
    CHECK(SplitTargets(LinearizeTargets(x)) == x);
  }
}

TEST_CASE("source interleaves tokens and tags") {
  Vocabulary v({"The", "DT", "President", "NN"});
  EncodedExample ex = EncodeSource(v, {{"The", "DT"}, {"President", "NN"}});
  CHECK(ex.source_tokens == std::vector<std::string>{"The", "DT", "President", "NN"});
  CHECK(ex.source_ids == std::vector<size_t>{5, 6, 7, 8});
  Tape tape(false);
  PointerGenerator m(TinyConfig(), v);
  m.Initialize();
  ForwardPass fp(m, tape, ex);
  CHECK(fp.encoder_states().size() == 4);
  CHECK(fp.encoder_states()[0].size() == 16);
}

TEST_CASE("encoder is directional and rejects empty input") {
  PointerGenerator m = TinyModel();
  EncodedExample a = EncodeTokens(m.vocab(), {"w0", "w1", "w2"}, {});
  EncodedExample b = EncodeTokens(m.vocab(), {"w2", "w1", "w0"}, {});
  Tape tape(false);
  ForwardPass fa(m, tape, a), fb(m, tape, b);
  CHECK(!(fa.encoder_states()[0].value() == fb.encoder_states()[2].value()));
  EncodedExample one = EncodeTokens(m.vocab(), {"w3"}, {});
  ForwardPass f1(m, tape, one);
  CHECK(f1.encoder_states().size() == 1);
  CHECK(f1.encoder_states()[0].size() == 16);
  EncodedExample empty = EncodeTokens(m.vocab(), {}, {});
  CHECK_THROWS_AS(ForwardPass(m, tape, empty), std::invalid_argument);
}

TEST_CASE("single source position attends fully") {
  PointerGenerator m = TinyModel();
  EncodedExample ex = EncodeTokens(m.vocab(), {"w1"}, {{"w1"}});
  Tape tape(false);
  ForwardPass fp(m, tape, ex);
  StepState next;
  StepOutput out = fp.Step(fp.initial_state(), Vocabulary::kBos, &next);
  CHECK(out.general_attention.value()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out.copy_attention.value()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

// Hand-sized additive attention with hidden size 1.
TEST_CASE("additive attention matches scalar arithmetic") {
  ModelConfig c = TinyConfig(1, 1, 1);
  PointerGenerator m(c, SyntheticVocab(6));
  m.Initialize();
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0", "<unk>"}, {});
  Tape tape(false);
  ForwardPass fp(m, tape, ex);
  m.param("attn.v").value[0] = 0.7;
  m.param("attn.W_h").value = Tensor::Matrix(1, 2, {0.3, -0.2});
  m.param("attn.W_s").value = Tensor::Matrix(1, 1, {0.5});
  m.param("attn.w_c").value[0] = 1.5;
  m.param("attn.b").value[0] = 0.1;
  // Keys were precomputed with the old W_h; build a fresh pass.
  Tape tape2(false);
  ForwardPass fp2(m, tape2, ex);
  const Tensor h0 = fp2.encoder_states()[0].value();
  const Tensor h1 = fp2.encoder_states()[1].value();
  const double s = 0.4;
  const double c0 = 0.25, c1 = 0.75;
  Var sv = tape2.Constant(Tensor::Vector({s}));
  Var cv = tape2.Constant(Tensor::Vector({c0, c1}));
  auto [a, ctx] = fp2.Attend(sv, cv, false);
  auto score = [&](const Tensor &h, double ci) {
    return 0.7 * std::tanh(0.3 * h[0] - 0.2 * h[1] + 0.5 * s + 1.5 * ci + 0.1);
  };
  double e0 = score(h0, c0), e1 = score(h1, c1);
  double a0 = std::exp(e0) / (std::exp(e0) + std::exp(e1));
  CHECK(a.value()[0] == doctest::Approx(a0).epsilon(1e-12));
  CHECK(a.value()[1] == doctest::Approx(1 - a0).epsilon(1e-12));
  CHECK(ctx.value()[0] == doctest::Approx(a0 * h0[0] + (1 - a0) * h1[0]).epsilon(1e-12));

  // Zero coverage reduces to the coverage-free score.
  Var zero = tape2.Constant(Tensor::Vector({0.0, 0.0}));
  auto [az, unused] = fp2.Attend(sv, zero, false);
  double f0 = 0.7 * std::tanh(0.3 * h0[0] - 0.2 * h0[1] + 0.5 * s + 0.1);
  double f1 = 0.7 * std::tanh(0.3 * h1[0] - 0.2 * h1[1] + 0.5 * s + 0.1);
  CHECK(az.value()[0] == doctest::Approx(std::exp(f0) / (std::exp(f0) + std::exp(f1))));
}

TEST_CASE("vocabulary distribution and generation probability by hand") {
  ModelConfig c = TinyConfig(1, 1, 1);
  PointerGenerator m(c, SyntheticVocab(6));
  for (Parameter &p : m.params().all()) p.value.Fill(0.0);
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0"}, {});
  Tape tape(false);
  ForwardPass fp(m, tape, ex);
  Var s = tape.Constant(Tensor::Vector({0.5}));
  Var ctx = tape.Constant(Tensor::Vector({0.2, -0.4}));
  Var x = tape.Constant(Tensor::Vector({1.0}));
  Tensor uniform = fp.VocabDistribution(s, ctx).value();
  for (double p : uniform.data()) CHECK(p == doctest::Approx(1.0 / 6));
  CHECK(fp.GenerationProbability(ctx, s, x).value()[0] == 0.5);

  m.param("out.V").value = Tensor::Matrix(1, 3, {1.0, 2.0, -1.0});
  m.param("out.b").value[0] = 0.1;
  m.param("out.V2").value = Tensor::Matrix(6, 1, {0, 0, 0, 0, 1.0, -2.0});
  m.param("out.b2").value = Tensor::Vector({0, 0, 0, 0, 0.3, 0});
  double hidden = 1.0 * 0.5 + 2.0 * 0.2 - 1.0 * -0.4 + 0.1;
  double l4 = hidden + 0.3, l5 = -2.0 * hidden;
  double z = 4 + std::exp(l4) + std::exp(l5);
  Tensor pv = fp.VocabDistribution(s, ctx).value();
  CHECK(pv[4] == doctest::Approx(std::exp(l4) / z).epsilon(1e-12));
  CHECK(pv[5] == doctest::Approx(std::exp(l5) / z).epsilon(1e-12));
  CHECK(pv[0] == doctest::Approx(1 / z).epsilon(1e-12));

  m.param("pgen.w_h").value = Tensor::Matrix(1, 2, {0.5, 1.0});
  m.param("pgen.w_s").value = Tensor::Matrix(1, 1, {-1.0});
  m.param("pgen.w_x").value = Tensor::Matrix(1, 1, {0.25});
  m.param("pgen.b").value[0] = 0.2;
  double zg = 0.5 * 0.2 + 1.0 * -0.4 - 0.5 + 0.25 + 0.2;
  CHECK(fp.GenerationProbability(ctx, s, x).value()[0] ==
        doctest::Approx(1 / (1 + std::exp(-zg))).epsilon(1e-12));
  m.param("pgen.b").value[0] = 40.0;
  CHECK(fp.GenerationProbability(ctx, s, x).value()[0] > 1 - 1e-12);
}

TEST_CASE("final distribution mixes generation and copying") {
  PointerGenerator m = TinyModel();
  Tape tape(false);
  SUBCASE("p_gen = 1 pads the vocabulary distribution") {
    EncodedExample ex = EncodeTokens(m.vocab(), {"w0", "oov"}, {});
    ForwardPass fp(m, tape, ex);
    Var pv = tape.Constant(Tensor::Vector(std::vector<double>(12, 1.0 / 12)));
    Var one = tape.Constant(Tensor::Vector({1.0}));
    Var a = tape.Constant(Tensor::Vector({0.3, 0.7}));
    Tensor p = fp.FinalDistribution(pv, one, a).value();
    REQUIRE(p.size() == 13);
    CHECK(p[12] == 0.0);
    CHECK(p[5] == doctest::Approx(1.0 / 12));
  }
  SUBCASE("p_gen = 0 copies an OOV token") {
    EncodedExample ex = EncodeTokens(m.vocab(), {"oov"}, {});
    ForwardPass fp(m, tape, ex);
    Var pv = tape.Constant(Tensor::Vector(std::vector<double>(12, 1.0 / 12)));
    Var zero = tape.Constant(Tensor::Vector({0.0}));
    Var a = tape.Constant(Tensor::Vector({1.0}));
    Tensor p = fp.FinalDistribution(pv, zero, a).value();
    CHECK(p[12] == 1.0);
    CHECK(SumOf(p) == 1.0);
  }
  SUBCASE("repeated in-vocabulary token sums its copy mass") {
    EncodedExample ex = EncodeTokens(m.vocab(), {"w2", "w2"}, {});
    ForwardPass fp(m, tape, ex);
    std::vector<double> pvals(12, 0.0);
    pvals[7] = 0.5;
    pvals[8] = 0.5;
    Var pv = tape.Constant(Tensor::Vector(pvals));
    Var pg = tape.Constant(Tensor::Vector({0.6}));
    Var a = tape.Constant(Tensor::Vector({0.25, 0.75}));
    Tensor p = fp.FinalDistribution(pv, pg, a).value();
    CHECK(p[7] == doctest::Approx(0.6 * 0.5 + 0.4 * 1.0).epsilon(1e-15));
    CHECK(p[8] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(SumOf(p) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("loss limits") {
  PointerGenerator m = TinyModel();
  m.mutable_config().coverage_loss_weight = 0;
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0"}, {});
  REQUIRE(ex.targets == std::vector<size_t>{Vocabulary::kEos});
  SUBCASE("uniform output costs ln n") {
    for (Parameter &p : m.params().all()) p.value.Fill(0.0);
    m.param("pgen.b").value[0] = 1e3;
    Tape tape(false);
    CHECK(m.Loss(tape, ex).value().item() == doctest::Approx(std::log(12.0)));
  }
  SUBCASE("certain output costs nothing") {
    for (Parameter &p : m.params().all()) p.value.Fill(0.0);
    m.param("pgen.b").value[0] = 1e3;
    m.param("out.b2").value[Vocabulary::kEos] = 1e3;
    Tape tape(false);
    CHECK(m.Loss(tape, ex).value().item() == doctest::Approx(0.0));
  }
}

TEST_CASE("two-step loss is the sum of per-step negative log probabilities") {
  PointerGenerator m = TinyModel();
  m.mutable_config().coverage_loss_weight = 0;
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0", "w4"}, {{"w4"}});
  REQUIRE(ex.targets.size() == 2);
  Tape tape(false);
  ForwardPass fp(m, tape, ex);
  std::vector<StepOutput> steps;
  double loss = fp.SequenceLoss(&steps).value().item();
  double expected = 0;
  for (size_t t = 0; t < 2; ++t) expected -= std::log(steps[t].final_dist.value()[ex.targets[t]]);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("out-of-vocabulary targets map to unk and are counted") {
  Vocabulary v = SyntheticVocab(8);
  EncodedExample ex = EncodeTokens(v, {"w0", "copyme"}, {{"copyme"}, {"missing"}});
  CHECK(ex.targets[0] == 8);
  CHECK(ex.targets[2] == Vocabulary::kUnk);
  CHECK(ex.unk_targets == 1);
  CHECK(ex.decoder_inputs[1] == Vocabulary::kUnk);
}

TEST_CASE("gradients match finite differences") {
  for (AttentionKind kind : {AttentionKind::kAdditiveCoverage, AttentionKind::kBilinearGeneral}) {
    PointerGenerator m = TinyModel(kind);
    EncodedExample ex =
        EncodeTokens(m.vocab(), {"w0", "w3", "sentinel", "w1", "w3"}, {{"sentinel", "w1"}, {"w3"}});
    CHECK(ModelGradCheck(m, ex) < 1e-4);
  }
}

TEST_CASE("distributions are normalized and coverage accumulates") {
  PointerGenerator m = TinyModel();
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0", "w3", "x", "w1"}, {{"x"}, {"w3", "w1"}});
  Tape tape(false);
  ForwardPass fp(m, tape, ex);
  std::vector<StepOutput> steps;
  fp.SequenceLoss(&steps);
  std::vector<double> g(4, 0.0), c(4, 0.0);
  for (const StepOutput &s : steps) {
    for (size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(s.general_coverage_before[i] - g[i]) <= 1e-12);
      CHECK(std::abs(s.copy_coverage_before[i] - c[i]) <= 1e-12);
      g[i] += s.general_attention.value()[i];
      c[i] += s.copy_attention.value()[i];
    }
    CHECK(std::abs(SumOf(s.p_vocab.value()) - 1) <= 1e-9);
    CHECK(std::abs(SumOf(s.final_dist.value()) - 1) <= 1e-9);
    CHECK(s.p_vocab.value().size() == 12);
  }
}

TEST_CASE("decoding") {
  PointerGenerator m = TinyModel();
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0", "w3", "x", "w1"}, {});
  SUBCASE("beam width one equals greedy") {
    DecodeOptions greedy{1, 12};
    DecodeResult a = m.Decode(ex, greedy);
    DecodeResult b = m.Decode(ex, greedy);
    CHECK(a.tokens == b.tokens);
    CHECK(a.tokens.size() <= 12);
    DecodeOptions beam{4, 12};
    DecodeResult c = m.Decode(ex, beam);
    CHECK(c.log_prob >= a.log_prob - 1e-12);
  }
  SUBCASE("forced end of sequence gives empty output") {
    m.param("pgen.b").value[0] = 50;
    m.param("out.b2").value[Vocabulary::kEos] = 50;
    DecodeResult r = m.Decode(ex, DecodeOptions{3, 10});
    CHECK(r.tokens.empty());
    CHECK(r.finished);
  }
  SUBCASE("copying an OOV surface returns it verbatim") {
    m.param("pgen.b").value[0] = -50;
    m.param("copy_attn.w_c").value.Fill(-50);
    DecodeResult r = m.Decode(ex, DecodeOptions{1, 3});
    CHECK(!r.tokens.empty());
  }
}

TEST_CASE("checkpoints round-trip byte for byte") {
  PointerGenerator m = TinyModel(AttentionKind::kAdditiveCoverage, 11);
  ModelCheckpoint ckpt{m, 42};
  std::string bytes = SerializeCheckpoint(ckpt);
  ModelCheckpoint back = ParseCheckpoint(bytes);
  CHECK(back.step == 42);
  CHECK(back.model.vocab() == m.vocab());
  CHECK(SerializeCheckpoint(back) == bytes);
  EncodedExample ex = EncodeTokens(m.vocab(), {"w0", "q", "w2"}, {{"q"}});
  Tape t1(false), t2(false);
  CHECK(m.Loss(t1, ex).value().item() == back.model.Loss(t2, ex).value().item());
  CHECK_THROWS(ParseCheckpoint(bytes.substr(0, bytes.size() - 3)));
  CHECK_THROWS(ParseCheckpoint("garbage"));
}

TEST_CASE("config validation") {
  ModelConfig c;
  CHECK_NOTHROW(c.Validate());
  c.layers = 0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  ModelConfig d;
  d.coverage_loss_weight = -1;
  CHECK_THROWS_AS(d.Validate(), ConfigError);
  ModelConfig e = ModelConfig::FromJson(ModelConfig().ToJson());
  CHECK(e.ToJson() == ModelConfig().ToJson());
}

}  // namespace
}  // namespace conex
