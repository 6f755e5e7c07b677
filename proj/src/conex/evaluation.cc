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

#include "conex/evaluation.h"

#include <algorithm>

#include <fmt/format.h>

namespace conex {

double Counts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Counts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Counts::f1() const {
  double p = precision(), r = recall();
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

Counts ScoreSpans(const std::vector<Span> &predicted, const std::vector<Span> &gold) {
  Counts c;
  for (const Span &g : gold) {
    bool exact = std::any_of(predicted.begin(), predicted.end(),
                             [&](const Span &p) { return p.SameRange(g); });
    if (exact) {
      ++c.tp;
    } else {
      ++c.fn;
    }
  }
  for (const Span &p : predicted) {
    bool exact = false, overlaps = false;
    for (const Span &g : gold) {
      exact = exact || p.SameRange(g);
      overlaps = overlaps || p.Overlaps(g);
    }
    if (!exact && overlaps) ++c.fp;
  }
  return c;
}

ScoreReport Score(const std::vector<Document> &predicted, const std::vector<Document> &gold) {
  if (predicted.size() != gold.size()) {
    throw ValidationError(fmt::format("{} predicted documents but {} gold documents",
                                      predicted.size(), gold.size()));
  }
  std::vector<DocumentScore> per_doc;
  for (size_t d = 0; d < gold.size(); ++d) {
    const Document &p = predicted[d];
    const Document &g = gold[d];
    if (p.id != g.id) {
      throw ValidationError(
          fmt::format("document {}: predicted id \"{}\" but gold id \"{}\"", d, p.id, g.id));
    }
    if (p.sentences.size() != g.sentences.size()) {
      throw ValidationError(fmt::format("document \"{}\": {} predicted sentences, {} gold",
                                        g.id, p.sentences.size(), g.sentences.size()));
    }
    DocumentScore ds{g.id, {}};
    for (size_t s = 0; s < g.sentences.size(); ++s) {
      ds.counts += ScoreSpans(p.sentences[s].concepts, g.sentences[s].concepts);
    }
    per_doc.push_back(std::move(ds));
  }
  return Aggregate(std::move(per_doc));
}

ScoreReport Aggregate(std::vector<DocumentScore> per_doc) {
  ScoreReport r;
  for (const DocumentScore &d : per_doc) r.total += d.counts;
  r.per_doc = std::move(per_doc);
  return r;
}

namespace {

nlohmann::ordered_json CountsJson(const Counts &c) {
  nlohmann::ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["precision"] = c.precision();
  j["recall"] = c.recall();
  j["f1"] = c.f1();
  return j;
}

}  // namespace

nlohmann::ordered_json ScoreReport::ToJson() const {
  nlohmann::ordered_json j = CountsJson(total);
  j["per_doc"] = nlohmann::ordered_json::array();
  for (const DocumentScore &d : per_doc) {
    nlohmann::ordered_json e;
    e["id"] = d.id;
    e.update(CountsJson(d.counts));
    j["per_doc"].push_back(std::move(e));
  }
  return j;
}

std::string ScoreReport::ToTable() const {
  size_t width = 8;
  for (const DocumentScore &d : per_doc) width = std::max(width, d.id.size());
  std::string out = fmt::format("{:<{}}  {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}\n", "document",
                                width, "tp", "fp", "fn", "precision", "recall", "f1");
  auto row = [&](const std::string &name, const Counts &c) {
    out += fmt::format("{:<{}}  {:>6} {:>6} {:>6} {:>9.4f} {:>9.4f} {:>9.4f}\n", name, width,
                       c.tp, c.fp, c.fn, c.precision(), c.recall(), c.f1());
  };
  for (const DocumentScore &d : per_doc) row(d.id, d.counts);
  row("TOTAL", total);
  return out;
}

}  // namespace conex
