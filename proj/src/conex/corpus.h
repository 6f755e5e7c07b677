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

// PoS-tagged documents with token-indexed concept spans, their file formats,
// and resolution of extracted concept strings back to mentions.

#ifndef CONEX_CORPUS_H_
#define CONEX_CORPUS_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conex {

// Malformed input record. The message names the offending line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a data-model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Token {
  std::string surface;
  std::string pos;
  size_t char_start = 0;
  size_t char_end = 0;

  bool operator==(const Token &) const = default;
};

// Half-open token range [begin, end) within a sentence.
struct Span {
  size_t begin = 0;
  size_t end = 0;
  std::optional<std::string> label;

  size_t length() const { return end - begin; }
  bool Overlaps(const Span &other) const {
    return begin < other.end && other.begin < end;
  }
  bool SameRange(const Span &other) const {
    return begin == other.begin && end == other.end;
  }
  bool operator==(const Span &) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<Span> concepts;

  // Whitespace-joined surfaces of tokens [begin, end).
  std::string SurfaceOf(size_t begin, size_t end) const;
  std::string SurfaceOf(const Span &span) const {
    return SurfaceOf(span.begin, span.end);
  }
};

enum class AnnotationKind { kNone, kSparseGold, kDenseWeak, kPredicted };

const char *AnnotationKindName(AnnotationKind kind);
AnnotationKind ParseAnnotationKind(std::string_view name);

struct Document {
  std::string id;
  std::string text;
  std::vector<Sentence> sentences;
  AnnotationKind kind = AnnotationKind::kNone;

  size_t ConceptCount() const;
};

enum class DocumentFormat { kJsonl, kConllTsv };

DocumentFormat ParseDocumentFormat(std::string_view name);

// Checks token offsets, surfaces, span bounds and the kind/span agreement.
// Throws ValidationError.
void ValidateDocument(const Document &doc);

// Parses one JSONL record. `line_number` is used in error messages.
Document ParseJsonlDocument(std::string_view line, size_t line_number = 1);

// Canonical single-line JSON rendering (no trailing newline).
std::string SerializeDocument(const Document &doc);

// CoNLL-style reader: `surface \t POS \t BIO` per line, blank line between
// sentences, `-DOCSTART-` lines between documents. `name` seeds document ids.
std::vector<Document> ParseConll(std::string_view content,
                                 std::string_view name = "doc");

std::vector<Document> LoadDocuments(const std::string &path,
                                    DocumentFormat format);
std::vector<Document> ParseDocuments(std::string_view content,
                                     DocumentFormat format,
                                     std::string_view name = "doc");

// Writes one canonical line per document, optionally preceded by `header`.
void WriteDocuments(const std::string &path, const std::vector<Document> &docs,
                    const std::string &header = "");

// Builds a Document from tokens laid out in `text`; sentences split with
// SplitSentences().
Document MakeDocument(std::string id, std::string text,
                      std::vector<Token> tokens);

// Builds a Document whose text is the tokens joined by single spaces and the
// sentences joined by newlines. Offsets are computed.
Document DocumentFromTokens(
    std::string id,
    const std::vector<std::vector<std::pair<std::string, std::string>>>
        &sentences);

// ---- Mention resolution ----------------------------------------------------

struct ResolveResult {
  std::vector<Span> spans;
  // Concept strings with no match in the sentence.
  std::vector<std::string> unmatched;
};

// Left-to-right selection of pairwise disjoint spans: repeatedly takes the
// candidate with the smallest start at or after the previous end, preferring
// the longest on ties. Output is sorted by start.
std::vector<Span> SelectDisjoint(std::vector<Span> candidates);

// Finds every token-subsequence match of every concept string (tokens
// separated by whitespace, case-sensitive) and selects disjoint mentions.
ResolveResult ResolveSpans(const Sentence &sentence,
                           const std::vector<std::string> &concepts);

// ---- Demo tokenizer --------------------------------------------------------

// Whitespace/punctuation tokenizer with a lexicon and suffix PoS tagger.
// Only meant for untagged demo input.
std::vector<Token> TokenizeAndTag(std::string_view text);

// Sentence boundaries after ".", "?" or "!" tokens followed by a token that
// starts with an uppercase letter. Returns [begin, end) token ranges.
std::vector<std::pair<size_t, size_t>> SplitSentences(
    const std::vector<Token> &tokens);

}  // namespace conex

#endif  // CONEX_CORPUS_H_
