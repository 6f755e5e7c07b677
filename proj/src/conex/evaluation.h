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

// Exact-span scoring against sparse gold annotations.
//
// A gold span matched exactly by a prediction is a true positive. A
// prediction that is not exact but shares a token with some gold span is a
// false positive; every gold span without an exact match is a false
// negative. Predictions touching no gold span are not counted.

#ifndef CONEX_EVALUATION_H_
#define CONEX_EVALUATION_H_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conex/corpus.h"

namespace conex {

struct Counts {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;

  Counts &operator+=(const Counts &o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Counts &) const = default;

  double precision() const;
  double recall() const;
  double f1() const;
};

Counts ScoreSpans(const std::vector<Span> &predicted, const std::vector<Span> &gold);

struct DocumentScore {
  std::string id;
  Counts counts;
};

struct ScoreReport {
  Counts total;
  std::vector<DocumentScore> per_doc;

  nlohmann::ordered_json ToJson() const;
  std::string ToTable() const;
};

// Documents are matched by position and must agree on id and sentence count.
// Throws ValidationError.
ScoreReport Score(const std::vector<Document> &predicted, const std::vector<Document> &gold);

// Micro-average of per-document counts.
ScoreReport Aggregate(std::vector<DocumentScore> per_doc);

}  // namespace conex

#endif  // CONEX_EVALUATION_H_
