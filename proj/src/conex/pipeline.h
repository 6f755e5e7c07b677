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

// Windowing, decoding orchestration, mention resolution and ensembling.

#ifndef CONEX_PIPELINE_H_
#define CONEX_PIPELINE_H_

#include <string>
#include <vector>

#include "conex/corpus.h"
#include "conex/model.h"

namespace conex {

// Token range [start, end) within a sentence.
struct Window {
  size_t start = 0;
  size_t end = 0;
  bool expanded = false;

  size_t length() const { return end - start; }
  bool operator==(const Window &) const = default;
};

struct TrainingWindow {
  Window window;
  std::vector<Span> targets;  // Sentence-relative, in order.
};

// Sliding windows of at most max_len tokens starting every `stride` tokens;
// the last window ends at the sentence end.
std::vector<Window> InferenceWindows(size_t num_tokens, size_t max_len, size_t stride);

// Inference windows widened at either edge until no annotated span crosses
// an edge. Targets are the spans inside each window.
std::vector<TrainingWindow> TrainingWindows(const Sentence &sentence, size_t max_len,
                                            size_t stride);

TrainingPair MakeTrainingPair(const Sentence &sentence, const TrainingWindow &window);

// Every training window of every sentence, in document order.
std::vector<TrainingPair> MakeTrainingPairs(const std::vector<Document> &docs,
                                            size_t max_len, size_t stride);

std::vector<std::pair<std::string, std::string>> WindowSource(const Sentence &sentence,
                                                              const Window &window);

struct ExtractOptions {
  size_t window = 50;
  size_t stride = 25;
  DecodeOptions decode;
};

struct ExtractStats {
  size_t windows = 0;
  size_t concepts = 0;   // Distinct concept strings decoded.
  size_t unmatched = 0;  // Strings with no mention in their sentence.
};

// Distinct concept strings decoded over the sentence's windows, in first-seen
// order.
std::vector<std::string> DecodeSentence(const PointerGenerator &model,
                                        const Sentence &sentence,
                                        const ExtractOptions &options,
                                        ExtractStats *stats = nullptr);

// Predicted copy of `doc` with resolved concept spans.
Document Extract(const PointerGenerator &model, const Document &doc,
                 const ExtractOptions &options, ExtractStats *stats = nullptr);

// Per-sentence union of concept strings across `docs` (same document,
// possibly different spans), re-resolved. Throws ValidationError when the
// inputs disagree on id or tokens.
Document Ensemble(const std::vector<Document> &docs);

// Ensembles aligned corpora document by document.
std::vector<Document> EnsembleCorpora(const std::vector<std::vector<Document>> &corpora);

}  // namespace conex

#endif  // CONEX_PIPELINE_H_
