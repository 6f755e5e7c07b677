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

#include "conex/pipeline.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "conex/util.h"

namespace conex {

std::vector<Window> InferenceWindows(size_t num_tokens, size_t max_len, size_t stride) {
  if (max_len == 0 || stride == 0) {
    throw std::invalid_argument("window length and stride must be positive");
  }
  std::vector<Window> out;
  for (size_t s = 0; s < num_tokens; s += stride) {
    size_t e = std::min(s + max_len, num_tokens);
    out.push_back(Window{s, e, false});
    if (e == num_tokens) break;
  }
  return out;
}

std::vector<TrainingWindow> TrainingWindows(const Sentence &sentence, size_t max_len,
                                            size_t stride) {
  std::vector<Span> spans = sentence.concepts;
  std::sort(spans.begin(), spans.end(),
            [](const Span &a, const Span &b) { return a.begin < b.begin; });
  for (const Span &s : spans) {
    if (s.length() > max_len) {
      Log(LogLevel::kWarning, "span [{}, {}) is longer than the window length {}", s.begin,
          s.end, max_len);
    }
  }
  std::vector<TrainingWindow> out;
  for (const Window &base : InferenceWindows(sentence.tokens.size(), max_len, stride)) {
    Window w = base;
    for (bool changed = true; changed;) {
      changed = false;
      for (const Span &s : spans) {
        if (s.begin < w.start && w.start < s.end) {
          w.start = s.begin;
          changed = true;
        }
        if (s.begin < w.end && w.end < s.end) {
          w.end = s.end;
          changed = true;
        }
      }
    }
    w.expanded = w.start != base.start || w.end != base.end;
    if (!out.empty() && out.back().window.start == w.start && out.back().window.end == w.end) {
      continue;
    }
    TrainingWindow tw{w, {}};
    for (const Span &s : spans) {
      if (w.start <= s.begin && s.end <= w.end) tw.targets.push_back(s);
    }
    out.push_back(std::move(tw));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> WindowSource(const Sentence &sentence,
                                                              const Window &window) {
  std::vector<std::pair<std::string, std::string>> source;
  for (size_t i = window.start; i < window.end; ++i) {
    source.emplace_back(sentence.tokens[i].surface, sentence.tokens[i].pos);
  }
  return source;
}

TrainingPair MakeTrainingPair(const Sentence &sentence, const TrainingWindow &window) {
  TrainingPair pair;
  pair.source = WindowSource(sentence, window.window);
  for (const Span &s : window.targets) {
    std::vector<std::string> tokens;
    for (size_t i = s.begin; i < s.end; ++i) tokens.push_back(sentence.tokens[i].surface);
    pair.concepts.push_back(std::move(tokens));
  }
  return pair;
}

std::vector<TrainingPair> MakeTrainingPairs(const std::vector<Document> &docs,
                                            size_t max_len, size_t stride) {
  std::vector<TrainingPair> pairs;
  for (const Document &doc : docs) {
    for (const Sentence &sentence : doc.sentences) {
      for (const TrainingWindow &w : TrainingWindows(sentence, max_len, stride)) {
        pairs.push_back(MakeTrainingPair(sentence, w));
      }
    }
  }
  return pairs;
}

std::vector<std::string> DecodeSentence(const PointerGenerator &model,
                                        const Sentence &sentence,
                                        const ExtractOptions &options, ExtractStats *stats) {
  std::vector<std::string> strings;
  std::unordered_set<std::string> seen;
  for (const Window &w : InferenceWindows(sentence.tokens.size(), options.window,
                                          options.stride)) {
    DecodeResult r = model.Decode(WindowSource(sentence, w), options.decode);
    if (stats != nullptr) ++stats->windows;
    for (const auto &c : SplitTargets(r.tokens)) {
      std::string joined;
      for (const std::string &t : c) joined += (joined.empty() ? "" : " ") + t;
      if (seen.insert(joined).second) strings.push_back(std::move(joined));
    }
  }
  if (stats != nullptr) stats->concepts += strings.size();
  return strings;
}

Document Extract(const PointerGenerator &model, const Document &doc,
                 const ExtractOptions &options, ExtractStats *stats) {
  Document out = doc;
  out.kind = AnnotationKind::kPredicted;
  for (Sentence &sentence : out.sentences) {
    std::vector<std::string> strings = DecodeSentence(model, sentence, options, stats);
    ResolveResult r = ResolveSpans(sentence, strings);
    sentence.concepts = std::move(r.spans);
    if (stats != nullptr) stats->unmatched += r.unmatched.size();
    for (const std::string &u : r.unmatched) {
      Log(LogLevel::kDebug, "{}: no mention of \"{}\"", doc.id, u);
    }
  }
  return out;
}

namespace {

void CheckAligned(const Document &a, const Document &b) {
  if (a.id != b.id) {
    throw ValidationError(fmt::format("ensemble inputs disagree: \"{}\" vs \"{}\"", a.id, b.id));
  }
  if (a.sentences.size() != b.sentences.size()) {
    throw ValidationError(fmt::format("document \"{}\": sentence counts differ", a.id));
  }
  for (size_t s = 0; s < a.sentences.size(); ++s) {
    const auto &ta = a.sentences[s].tokens;
    const auto &tb = b.sentences[s].tokens;
    bool same = ta.size() == tb.size();
    for (size_t i = 0; same && i < ta.size(); ++i) same = ta[i].surface == tb[i].surface;
    if (!same) {
      throw ValidationError(fmt::format("document \"{}\": sentence {} tokens differ", a.id, s));
    }
  }
}

}  // namespace

Document Ensemble(const std::vector<Document> &docs) {
  if (docs.empty()) throw std::invalid_argument("nothing to ensemble");
  for (size_t i = 1; i < docs.size(); ++i) CheckAligned(docs[0], docs[i]);
  Document out = docs[0];
  out.kind = AnnotationKind::kPredicted;
  for (size_t s = 0; s < out.sentences.size(); ++s) {
    std::set<std::string> strings;
    for (const Document &d : docs) {
      const Sentence &sentence = d.sentences[s];
      for (const Span &span : sentence.concepts) strings.insert(sentence.SurfaceOf(span));
    }
    out.sentences[s].concepts =
        ResolveSpans(out.sentences[s], {strings.begin(), strings.end()}).spans;
  }
  return out;
}

std::vector<Document> EnsembleCorpora(const std::vector<std::vector<Document>> &corpora) {
  if (corpora.empty()) return {};
  for (const auto &c : corpora) {
    if (c.size() != corpora[0].size()) {
      throw ValidationError("ensemble inputs have different document counts");
    }
  }
  std::vector<Document> out;
  for (size_t d = 0; d < corpora[0].size(); ++d) {
    std::vector<Document> docs;
    for (const auto &c : corpora) docs.push_back(c[d]);
    out.push_back(Ensemble(docs));
  }
  return out;
}

}  // namespace conex
