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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "conex/annotator.h"
#include "conex/corpus.h"
#include "conex/evaluation.h"
#include "conex/model.h"
#include "conex/ngram.h"
#include "conex/pipeline.h"
#include "conex/trainer.h"
#include "conex/util.h"
#include "test_util.h"

namespace conex {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double SumOf(const Tensor &t) { return std::accumulate(t.data().begin(), t.data().end(), 0.0); }

// ---- Model criteria ----------------------------------------------------------

Outcome GradientCheck() {
  auto start = Clock::now();
  ModelConfig c = testing::TinyConfig(2, 8, 6);
  c.attention = AttentionKind::kAdditiveCoverage;
  c.coverage_loss_weight = 0.5;
  c.seed = 17;
  PointerGenerator m(c, testing::SyntheticVocab(12));
  m.Initialize();
  // Five source positions, one of them OOV, so both the generator and the
  // copy path carry gradient.
  EncodedExample ex = EncodeTokens(m.vocab(), {"w2", "w5", "zeta", "w0", "w6"},
                                   {{"zeta", "w0"}, {"w6"}});
  double worst = testing::ModelGradCheck(m, ex);
  double secs = Seconds(start);
  return {worst < 1e-4 && secs < 30.0,
          fmt::format("max relative error {:.3g} over {} values, {:.1f} s", worst,
                      m.params().NumValues(), secs)};
}

Outcome DistributionLaws() {
  double worst_sum = 0.0, worst_cov = 0.0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    ModelConfig c = testing::TinyConfig(1 + seed % 2, 8, 6);
    c.seed = seed;
    c.attention = seed % 2 == 0 ? AttentionKind::kAdditiveCoverage
                                : AttentionKind::kBilinearGeneral;
    PointerGenerator m(c, testing::SyntheticVocab(12));
    m.Initialize();
    std::vector<std::string> source;
    for (size_t i = 0, n = 1 + rng() % 9; i < n; ++i) {
      source.push_back(rng() % 4 == 0 ? fmt::format("oov{}", rng() % 3)
                                      : fmt::format("w{}", rng() % 7));
    }
    std::vector<std::vector<std::string>> concepts;
    for (size_t k = 0, n = rng() % 3; k < n; ++k) concepts.push_back({source[rng() % source.size()]});
    EncodedExample ex = EncodeTokens(m.vocab(), source, concepts);
    Tape tape(false);
    ForwardPass fp(m, tape, ex);
    std::vector<StepOutput> steps;
    fp.SequenceLoss(&steps);
    std::vector<double> g(source.size(), 0.0), cp(source.size(), 0.0);
    for (const StepOutput &s : steps) {
      for (size_t i = 0; i < source.size(); ++i) {
        worst_cov = std::max({worst_cov, std::abs(s.general_coverage_before[i] - g[i]),
                              std::abs(s.copy_coverage_before[i] - cp[i])});
        g[i] += s.general_attention.value()[i];
        cp[i] += s.copy_attention.value()[i];
      }
      for (const Var *v : {&s.general_attention, &s.copy_attention, &s.p_vocab, &s.final_dist}) {
        worst_sum = std::max(worst_sum, std::abs(SumOf(v->value()) - 1.0));
      }
    }
  }
  return {worst_sum <= 1e-9 && worst_cov <= 1e-12,
          fmt::format("max |sum - 1| {:.3g}, max coverage deviation {:.3g}", worst_sum,
                      worst_cov)};
}

Outcome CopyOov() {
  auto start = Clock::now();
  std::mt19937_64 rng(11);
  const std::vector<std::pair<std::string, std::string>> filler = {
      {"the", "DT"},     {"river", "NN"}, {"flows", "VBZ"},  {"into", "IN"},  {"a", "DT"},
      {"valley", "NN"},  {"near", "IN"},  {"old", "JJ"},     {"town", "NN"},  {"we", "PRP"},
      {"saw", "VBD"},    {"bright", "JJ"}, {"stone", "NN"},  {"over", "IN"},  {"hill", "NN"}};
  auto sentinel = [&](const char *prefix) {
    std::string s = prefix;
    for (int i = 0; i < 5; ++i) s += static_cast<char>('a' + rng() % 26);
    return s;
  };
  auto make = [&](const std::string &s) {
    TrainingPair p;
    size_t n = 4 + rng() % 7, at = rng() % (n + 1);
    for (size_t i = 0; i <= n; ++i) {
      if (i == at) {
        p.source.push_back({"[", "-LRB-"});
        p.source.push_back({s, "NNP"});
        p.source.push_back({"]", "-RRB-"});
      }
      if (i < n) p.source.push_back(filler[rng() % filler.size()]);
    }
    p.concepts = {{s}};
    return p;
  };
  std::vector<TrainingPair> train, test;
  for (int i = 0; i < 200; ++i) train.push_back(make(sentinel("tr")));
  for (int i = 0; i < 20; ++i) test.push_back(make(sentinel("te")));

  ModelConfig c;
  c.layers = 2;
  c.hidden_size = 16;
  c.embedding_size = 12;
  c.vocab_size = 1000;
  // Each training sentinel occurs twice, so all of them stay out of the
  // vocabulary and can only be produced by copying.
  c.min_count = 3;
  c.batch_size = 8;
  c.learning_rate = 0.5;
  c.lr_decay = 1.0;
  c.train_steps = 300;
  c.seed = 1;
  TrainResult r = Train(c, train, {});
  size_t oov = 0, exact = 0;
  for (const TrainingPair &p : test) {
    const std::string &want = p.concepts[0][0];
    if (!r.last.model.vocab().Find(want)) ++oov;
    DecodeResult d = r.last.model.Decode(p.source, DecodeOptions{1, 10});
    if (d.tokens == std::vector<std::string>{want}) ++exact;
  }
  double secs = Seconds(start);
  return {oov == test.size() && exact >= 19 && secs < 300.0,
          fmt::format("{}/{} unseen sentinels copied exactly ({} OOV), {:.1f} s", exact,
                      test.size(), oov, secs)};
}

// First `n` sentences of the fixture corpus, weakly annotated.
std::vector<Document> WeakSentences(size_t n) {
  FrequencyTable table = LoadFrequencyTable(testing::DataPath("corpus_freq.tsv"));
  WeakAnnotator annotator(table, AnnotatorConfig{});
  std::vector<Document> out;
  size_t count = 0;
  for (const Document &d : LoadDocuments(testing::DataPath("corpus100.jsonl"),
                                         DocumentFormat::kJsonl)) {
    if (count >= n) break;
    Document a = annotator.Annotate(d);
    if (count + a.sentences.size() > n) a.sentences.resize(n - count);
    count += a.sentences.size();
    out.push_back(std::move(a));
  }
  return out;
}

Outcome Overfit() {
  auto start = Clock::now();
  std::vector<Document> weak = WeakSentences(50);
  size_t sentences = 0, spans = 0;
  for (const Document &d : weak) {
    sentences += d.sentences.size();
    spans += d.ConceptCount();
  }
  ModelConfig c;
  c.layers = 2;
  c.hidden_size = 32;
  c.embedding_size = 24;
  c.vocab_size = 1000;
  c.batch_size = 4;
  c.learning_rate = 1.0;
  c.lr_decay = 1.0;
  c.train_steps = 2000;
  c.seed = 1;
  TrainResult r = Train(c, MakeTrainingPairs(weak, 50, 25), {});
  std::vector<Document> pred;
  for (const Document &d : weak) pred.push_back(Extract(r.last.model, d, ExtractOptions{}));
  ScoreReport report = Score(pred, weak);
  double secs = Seconds(start);
  return {sentences == 50 && report.total.f1() >= 0.95 && secs < 600.0,
          fmt::format("{} sentences, {} spans, {} steps: P {:.4f} R {:.4f} F1 {:.4f}, {:.1f} s",
                      sentences, spans, c.train_steps, report.total.precision(),
                      report.total.recall(), report.total.f1(), secs)};
}

// ---- Annotation criteria -------------------------------------------------------

Outcome AngleUnitTruth() {
  double flat = TangentialAngle(std::vector<double>(11, 4.0), 5);
  std::vector<double> line(21);
  std::iota(line.begin(), line.end(), 0.0);
  double worst_unit = 0.0;
  for (size_t x = 0; x < line.size(); ++x) {
    worst_unit = std::max(worst_unit, std::abs(TangentialAngle(line, x) - 45.0));
  }
  size_t mismatches = 0, checked = 0;
  for (size_t n = 2; n <= 120; ++n) {
    for (size_t x = 0; x < n; ++x) {
      size_t want = 50;
      want = std::min(want, x);
      want = std::min(want, n - 1 - x);
      mismatches += GridStep(n, x) != want;
      ++checked;
    }
  }
  return {flat == 0.0 && worst_unit <= 1e-9 && mismatches == 0,
          fmt::format("flat {} deg, unit slope max error {:.3g}, border rule {}/{} agree", flat,
                      worst_unit, checked - mismatches, checked)};
}

Outcome TableOrdering() {
  FrequencyTable table = LoadFrequencyTable(testing::DataPath("concrete_freq.tsv"));
  const std::vector<std::string> order = {
      "reinforced", "mixed",     "prestressed", "pre-cast", "first",     "original", "massive",
      "resistant",  "special",   "polymer",     "tall-wall", "large",    "open"};
  const std::set<std::string> kept_expected = {"reinforced", "mixed", "prestressed", "pre-cast"};
  AnnotatorConfig config;
  std::vector<double> angles;
  bool ordered = true, split = true;
  std::string listing;
  for (const std::string &adj : order) {
    NgramKey key({adj + "_ADJ", "concrete_NOUN"});
    NeighborCurve curve = BuildNeighborCurve(table, key, VaryingSlot::kHead);
    double angle = TangentialAngle(curve, curve.focus_index, config.grid_h);
    if (!angles.empty() && !(angle < angles.back())) ordered = false;
    angles.push_back(angle);
    listing += fmt::format(" {}={:.2f}", adj, angle);

    Document d = DocumentFromTokens("t", {{{adj, "JJ"}, {"concrete", "NN"}}});
    const Sentence &s = d.sentences[0];
    bool kept = !FilterDistinctive(MatchPatterns(s, 0, 2), table, config).empty();
    if (kept != (kept_expected.count(adj) > 0)) split = false;
  }
  for (const char *oov : {"unusual", "raised"}) {
    Document d = DocumentFromTokens("t", {{{oov, "JJ"}, {"concrete", "NN"}}});
    if (!FilterDistinctive(MatchPatterns(d.sentences[0], 0, 2), table, config).empty()) {
      split = false;
    }
  }
  return {ordered && split,
          fmt::format("ranking {}, threshold split {};{}", ordered ? "exact" : "WRONG",
                      split ? "exact" : "WRONG", listing)};
}

Outcome AnnotatorFullness() {
  FrequencyTable table = LoadFrequencyTable(testing::DataPath("corpus_freq.tsv"));
  WeakAnnotator annotator(table, AnnotatorConfig{});
  CapitalizedRunsDetector ner;
  std::vector<Document> docs =
      LoadDocuments(testing::DataPath("corpus100.jsonl"), DocumentFormat::kJsonl);
  size_t nouns = 0, violations = 0, entities = 0, changed = 0;
  for (const Document &doc : docs) {
    Document out = annotator.Annotate(doc);
    for (size_t si = 0; si < out.sentences.size(); ++si) {
      const Sentence &s = out.sentences[si];
      std::vector<int> cover(s.tokens.size(), 0);
      for (const Span &sp : s.concepts) {
        for (size_t i = sp.begin; i < sp.end; ++i) ++cover[i];
      }
      for (size_t i = 0; i < s.tokens.size(); ++i) {
        const std::string &pos = s.tokens[i].pos;
        if (pos == "NN" || pos == "NNS" || pos == "NNP" || pos == "NNPS" || pos == "CD") {
          ++nouns;
          violations += cover[i] != 1;
        }
      }
      for (const Span &e : ner.Detect(doc.sentences[si])) {
        ++entities;
        changed += std::find(s.concepts.begin(), s.concepts.end(), e) == s.concepts.end();
      }
    }
  }
  return {docs.size() == 100 && violations == 0 && changed == 0 && nouns > 0,
          fmt::format("{} docs, {} noun/CD tokens, {} not covered exactly once; {} entity spans, "
                      "{} modified",
                      docs.size(), nouns, violations, entities, changed)};
}

// ---- Evaluation criterion -----------------------------------------------------------

// Enumerates every (prediction, gold) pair and classifies it from token sets.
Counts BruteForceCounts(const std::vector<Span> &pred, const std::vector<Span> &gold) {
  auto tokens = [](const Span &s) {
    std::set<size_t> t;
    for (size_t i = s.begin; i < s.end; ++i) t.insert(i);
    return t;
  };
  Counts c;
  std::vector<bool> pred_partial(pred.size(), false), pred_exact(pred.size(), false);
  for (const Span &g : gold) {
    std::set<size_t> tg = tokens(g);
    bool exact = false;
    for (size_t p = 0; p < pred.size(); ++p) {
      std::set<size_t> tp = tokens(pred[p]);
      std::vector<size_t> shared;
      std::set_intersection(tp.begin(), tp.end(), tg.begin(), tg.end(),
                            std::back_inserter(shared));
      if (tp == tg) {
        exact = true;
        pred_exact[p] = true;
      } else if (!shared.empty()) {
        pred_partial[p] = true;
      }
    }
    exact ? ++c.tp : ++c.fn;
  }
  for (size_t p = 0; p < pred.size(); ++p) c.fp += pred_partial[p] && !pred_exact[p];
  return c;
}

Outcome ScorerOracle() {
  std::mt19937_64 rng(2024);
  auto random_spans = [&](size_t n) {
    std::vector<Span> out;
    size_t k = rng() % 6, pos = 0;
    for (size_t j = 0; j < k && pos < n; ++j) {
      size_t b = pos + rng() % 3;
      if (b >= n) break;
      size_t e = std::min(n, b + 1 + rng() % 4);
      out.push_back(Span{b, e, std::nullopt});
      pos = e;
    }
    return out;
  };
  size_t agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    size_t n = 2 + rng() % 20;
    std::vector<Span> gold = random_spans(n), pred = random_spans(n);
    agree += ScoreSpans(pred, gold) == BruteForceCounts(pred, gold);
  }
  Counts partial = ScoreSpans({Span{0, 2, {}}}, {Span{0, 3, {}}});
  bool definition = partial == Counts{0, 1, 1} && partial.precision() == 0.0 &&
                    partial.recall() == 0.0 && partial.f1() == 0.0;
  Counts mixed = ScoreSpans({Span{0, 2, {}}, Span{4, 6, {}}}, {Span{0, 2, {}}, Span{5, 6, {}}});
  definition = definition && mixed == Counts{1, 1, 1} && mixed.f1() == 0.5;
  return {agree == 1000 && definition,
          fmt::format("{}/1000 random sentences agree; partial-overlap case P=R={} ", agree,
                      partial.precision())};
}

// ---- Determinism and round trips ------------------------------------------------------

Outcome Determinism() {
  ModelConfig c = testing::TinyConfig(2, 12, 8);
  c.batch_size = 2;
  c.train_steps = 30;
  c.learning_rate = 0.5;
  c.seed = 99;
  std::vector<Document> weak = WeakSentences(10);
  std::vector<TrainingPair> pairs = MakeTrainingPairs(weak, 50, 25);
  std::string a = SerializeCheckpoint(Train(c, pairs, {}).last);
  std::string b = SerializeCheckpoint(Train(c, pairs, {}).last);
  bool same_training = a == b;
  bool ckpt_round_trip = SerializeCheckpoint(ParseCheckpoint(a)) == a;

  std::vector<Document> docs =
      LoadDocuments(testing::DataPath("corpus100.jsonl"), DocumentFormat::kJsonl);
  FrequencyTable table = LoadFrequencyTable(testing::DataPath("corpus_freq.tsv"));
  WeakAnnotator annotator(table, AnnotatorConfig{});
  size_t jsonl_ok = 0;
  for (const Document &d : docs) {
    std::string line = SerializeDocument(annotator.Annotate(d));
    jsonl_ok += SerializeDocument(ParseJsonlDocument(line)) == line;
  }
  std::string raw = ReadFile(testing::DataPath("corpus100.jsonl"));
  std::string rendered;
  for (const Document &d : ParseDocuments(raw, DocumentFormat::kJsonl)) {
    rendered += SerializeDocument(d) + "\n";
  }
  bool file_round_trip = rendered == raw;
  return {same_training && ckpt_round_trip && jsonl_ok == docs.size() && file_round_trip,
          fmt::format("training twice {}, checkpoint {} bytes {}, JSONL {}/{} records, "
                      "fixture file {}",
                      same_training ? "identical" : "DIFFERS", a.size(),
                      ckpt_round_trip ? "round-trip" : "DIFFER", jsonl_ok, docs.size(),
                      file_round_trip ? "identical" : "DIFFERS")};
}

Outcome RunningExample() {
  const std::string text = "The President is elected by a direct vote";
  Document doc = MakeDocument("example", text, TokenizeAndTag(text));
  Document train = doc;
  train.kind = AnnotationKind::kDenseWeak;
  train.sentences[0].concepts = {Span{1, 2, {}}, Span{6, 8, {}}};
  ModelConfig c = testing::TinyConfig(2, 16, 12);
  c.init_scale = 0.1;
  c.batch_size = 1;
  c.learning_rate = 1.0;
  c.lr_decay = 1.0;
  c.train_steps = 400;
  c.seed = 3;
  TrainResult r = Train(c, MakeTrainingPairs({train}, 50, 25), {});
  Document out = Extract(r.last.model, doc, ExtractOptions{});
  std::string found;
  for (const Span &s : out.sentences[0].concepts) {
    found += fmt::format(" [{},{}) \"{}\"", s.begin, s.end, out.sentences[0].SurfaceOf(s));
  }
  return {out.sentences[0].concepts == train.sentences[0].concepts,
          fmt::format("final loss {:.3g}, extracted{}", r.loss_curve.back(), found)};
}

}  // namespace
}  // namespace conex

// Optional arguments restrict the run to the named criteria.
int main(int argc, char **argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  struct Criterion {
    const char *name;
    std::function<conex::Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient-correctness", conex::GradientCheck},
      {"distribution-laws", conex::DistributionLaws},
      {"copy-oov", conex::CopyOov},
      {"tiny-corpus-overfit", conex::Overfit},
      {"angle-unit-truth", conex::AngleUnitTruth},
      {"candidate-angle-ordering", conex::TableOrdering},
      {"annotator-fullness", conex::AnnotatorFullness},
      {"scorer-oracle", conex::ScorerOracle},
      {"determinism-round-trip", conex::Determinism},
      {"running-example", conex::RunningExample},
  };
  conex::SetLogLevel(conex::LogLevel::kError);
  int failed = 0;
  for (const Criterion &c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    conex::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", c.name, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
