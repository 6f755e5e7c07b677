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

// Shared helpers for the unit and acceptance tests.

#ifndef CONEX_TESTS_TEST_UTIL_H_
#define CONEX_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "conex/model.h"

namespace conex::testing {

inline std::string DataPath(const std::string &name) {
  return std::string(CONEX_TEST_DATA) + "/" + name;
}

// Vocabulary of `n` total entries: the reserved ones plus w0, w1, ...
inline Vocabulary SyntheticVocab(size_t n) {
  std::vector<std::string> words;
  for (size_t i = Vocabulary::kNumReserved; i < n; ++i) {
    words.push_back("w" + std::to_string(i - Vocabulary::kNumReserved));
  }
  return Vocabulary(words);
}

inline ModelConfig TinyConfig(size_t layers = 2, size_t hidden = 8, size_t embedding = 6) {
  ModelConfig c;
  c.layers = static_cast<int>(layers);
  c.hidden_size = static_cast<int>(hidden);
  c.embedding_size = static_cast<int>(embedding);
  c.vocab_size = 1000;
  c.init_scale = 0.5;
  return c;
}

// Largest relative error between autodiff and central differences over every
// parameter value; denominator max(|a|, |n|, 1e-4).
inline double ModelGradCheck(const PointerGenerator &model, const EncodedExample &ex,
                             double eps = 1e-5) {
  PointerGenerator &m = const_cast<PointerGenerator &>(model);
  m.params().ZeroGrad();
  {
    Tape tape;
    tape.Backward(model.Loss(tape, ex));
  }
  auto loss = [&] {
    Tape tape(false);
    return model.Loss(tape, ex).value().item();
  };
  double worst = 0.0;
  for (Parameter &p : m.params().all()) {
    auto v = p.value.data();
    for (size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + eps;
      const double up = loss();
      v[i] = orig - eps;
      const double down = loss();
      v[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = p.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace conex::testing

#endif  // CONEX_TESTS_TEST_UTIL_H_
