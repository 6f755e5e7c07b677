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

// Dense weak annotation of PoS-tagged text with concept spans.
//
// Per sentence: named entities first; then, in the fragments between them,
// PoS-pattern n-grams whose tangential angles mark them as distinctive are
// merged into multi-token concepts; finally all remaining nouns and numbers
// become single-token concepts.

#ifndef CONEX_ANNOTATOR_H_
#define CONEX_ANNOTATOR_H_

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conex/corpus.h"
#include "conex/ngram.h"

namespace conex {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token classes used by pattern slots.
enum class SlotClass { kNoun, kAdjective, kVerb, kNumber, kDeterminer, kOf };

bool MatchesSlot(SlotClass slot, const Token &token);
bool IsNounTag(std::string_view pos);

struct PosPattern {
  std::string name;
  std::vector<SlotClass> slots;

  size_t arity() const { return slots.size(); }
};

// The fourteen patterns, in a fixed order.
const std::vector<PosPattern> &AllPatterns();
const PosPattern &PatternByName(std::string_view name);

struct PatternMatch {
  Span span;
  const PosPattern *pattern = nullptr;
  NgramKey key;
};

struct AnnotatorConfig {
  double alpha_min1 = kDefaultAlphaMin1;
  double alpha_min2 = kDefaultAlphaMin2;
  std::string ner = "capitalized-runs";
  int grid_h = kDefaultGridStep;

  // Throws ConfigError.
  void Validate() const;
};

// Named-entity detection plug-in. Implementations return disjoint spans
// sorted by start.
class EntityDetector {
 public:
  virtual ~EntityDetector() = default;
  virtual std::vector<Span> Detect(const Document &doc,
                                   size_t sentence_index) const = 0;
};

// Maximal runs of capitalized NNP/NNPS tokens; "of" and "the" may sit
// between two capitalized tokens.
class CapitalizedRunsDetector : public EntityDetector {
 public:
  std::vector<Span> Detect(const Document &doc, size_t sentence_index) const override;
  std::vector<Span> Detect(const Sentence &sentence) const;
};

// Precomputed spans per document id and sentence index.
using SpanIndex = std::map<std::string, std::vector<std::vector<Span>>>;

// Reads the external span format: one JSON object per line,
// {"id": str, "sentences": [[{"a": int, "b": int}, ...], ...]}.
SpanIndex ParseSpanFile(std::string_view content);
SpanIndex LoadSpanFile(const std::string &path);

class FileEntityDetector : public EntityDetector {
 public:
  explicit FileEntityDetector(SpanIndex spans) : spans_(std::move(spans)) {}
  std::vector<Span> Detect(const Document &doc, size_t sentence_index) const override;

 private:
  SpanIndex spans_;
};

// "capitalized-runs" or "file:<path>". Throws ConfigError otherwise.
std::unique_ptr<EntityDetector> MakeEntityDetector(const std::string &id);

// Default-detector convenience.
std::vector<Span> DetectNamedEntities(const Sentence &sentence);

// All matches of all patterns inside tokens [begin, end) of `sentence`,
// ordered by start, then by pattern order.
std::vector<PatternMatch> MatchPatterns(const Sentence &sentence, size_t begin,
                                        size_t end);

struct MatchAngles {
  std::optional<double> head;  // Varying the first open-class slot.
  std::optional<double> tail;  // Varying the last open-class slot.
};

MatchAngles ComputeAngles(const FrequencyTable &table, const NgramKey &key,
                          int grid_h);

// Keeps matches whose angles pass the thresholds. A match missing from the
// table in both directions is dropped.
std::vector<PatternMatch> FilterDistinctive(const std::vector<PatternMatch> &matches,
                                            const FrequencyTable &table,
                                            const AnnotatorConfig &config);

// Merges token-sharing matches into maximal spans, then strips trailing
// non-noun tokens. Empty results are discarded.
std::vector<Span> CombineMatches(const Sentence &sentence,
                                 const std::vector<PatternMatch> &matches);

// One span per NN/NNS/NNP/NNPS/CD token not covered by `used`.
std::vector<Span> RecoverSingleTokens(const Sentence &sentence,
                                      const std::vector<Span> &used);

struct AnnotationStats {
  size_t named_entities = 0;
  size_t multi_token = 0;
  size_t single_token = 0;
};

class WeakAnnotator {
 public:
  WeakAnnotator(const FrequencyTable &table, AnnotatorConfig config);
  WeakAnnotator(const FrequencyTable &table, AnnotatorConfig config,
                std::unique_ptr<EntityDetector> detector);

  std::vector<Span> AnnotateSentence(const Document &doc, size_t sentence_index,
                                     AnnotationStats *stats = nullptr) const;
  // Returns a dense_weak copy. Throws ValidationError on untagged tokens.
  Document Annotate(const Document &doc, AnnotationStats *stats = nullptr) const;

  const AnnotatorConfig &config() const { return config_; }

 private:
  const FrequencyTable &table_;
  AnnotatorConfig config_;
  std::unique_ptr<EntityDetector> detector_;
};

struct MergeDiagnostics {
  std::vector<std::string> rejected;
};

// Adds externally produced spans to each sentence's concepts; out-of-range
// spans are rejected with a diagnostic; overlaps resolved longest-first.
Document MergeExternalAnnotations(const Document &doc,
                                  const std::vector<std::vector<Span>> &external,
                                  MergeDiagnostics *diagnostics = nullptr);

}  // namespace conex

#endif  // CONEX_ANNOTATOR_H_
