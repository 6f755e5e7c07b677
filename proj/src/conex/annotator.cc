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

#include <algorithm>
#include <cctype>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "conex/util.h"

namespace conex {

namespace {

bool IsCapitalized(const Token &t) {
  return !t.surface.empty() &&
         std::isupper(static_cast<unsigned char>(t.surface[0])) != 0;
}

bool IsProperNoun(const Token &t) {
  return (t.pos == "NNP" || t.pos == "NNPS") && IsCapitalized(t);
}

bool IsNameConnector(const Token &t) {
  return t.surface == "of" || t.surface == "the";
}

PosPattern MakePattern(std::string name) {
  PosPattern p;
  for (const std::string &part : SplitString(name, '_')) {
    if (part == "N") p.slots.push_back(SlotClass::kNoun);
    else if (part == "J") p.slots.push_back(SlotClass::kAdjective);
    else if (part == "V") p.slots.push_back(SlotClass::kVerb);
    else if (part == "CD") p.slots.push_back(SlotClass::kNumber);
    else if (part == "DT") p.slots.push_back(SlotClass::kDeterminer);
    else if (part == "of") p.slots.push_back(SlotClass::kOf);
  }
  p.name = std::move(name);
  return p;
}

// Union-find over match indices.
class DisjointSets {
 public:
  explicit DisjointSets(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  size_t Find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(size_t a, size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<size_t> parent_;
};

}  // namespace

bool IsNounTag(std::string_view pos) {
  return pos == "NN" || pos == "NNS" || pos == "NNP" || pos == "NNPS";
}

bool MatchesSlot(SlotClass slot, const Token &token) {
  const std::string &p = token.pos;
  switch (slot) {
    case SlotClass::kNoun: return IsNounTag(p);
    case SlotClass::kAdjective: return p == "JJ" || p == "JJR" || p == "JJS";
    case SlotClass::kVerb: return p == "VBD" || p == "VBG" || p == "VBN";
    case SlotClass::kNumber: return p == "CD";
    case SlotClass::kDeterminer: return p == "DT";
    case SlotClass::kOf: return token.surface == "of";
  }
  return false;
}

const std::vector<PosPattern> &AllPatterns() {
  static const auto *patterns = [] {
    auto *v = new std::vector<PosPattern>;
    for (const char *name :
         {"N_N", "J_N", "V_N", "N_J", "J_J", "V_J", "N_of_N", "N_of_DT_N",
          "N_of_J", "N_of_DT_J", "N_of_V", "N_of_DT_V", "CD_N", "CD_J"}) {
      v->push_back(MakePattern(name));
    }
    return v;
  }();
  return *patterns;
}

const PosPattern &PatternByName(std::string_view name) {
  for (const PosPattern &p : AllPatterns()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument(fmt::format("unknown pattern \"{}\"", name));
}

void AnnotatorConfig::Validate() const {
  if (alpha_min1 < alpha_min2) {
    throw ConfigError(fmt::format("alpha_min1 ({}) must be >= alpha_min2 ({})",
                                  alpha_min1, alpha_min2));
  }
  if (grid_h < 1) throw ConfigError(fmt::format("grid_h must be >= 1, got {}", grid_h));
  if (ner != "capitalized-runs" && !ner.starts_with("file:")) {
    throw ConfigError(fmt::format("unknown NER plug-in \"{}\"", ner));
  }
}

// ---- Named entities --------------------------------------------------------

std::vector<Span> CapitalizedRunsDetector::Detect(const Sentence &sentence) const {
  const auto &toks = sentence.tokens;
  std::vector<Span> out;
  size_t i = 0;
  while (i < toks.size()) {
    if (!IsProperNoun(toks[i])) {
      ++i;
      continue;
    }
    size_t end = i + 1;
    while (end < toks.size()) {
      if (IsProperNoun(toks[end])) {
        ++end;
        continue;
      }
      size_t j = end;
      while (j < toks.size() && IsNameConnector(toks[j])) ++j;
      if (j > end && j < toks.size() && IsProperNoun(toks[j])) {
        end = j + 1;
        continue;
      }
      break;
    }
    out.push_back(Span{i, end, std::nullopt});
    i = end;
  }
  return out;
}

std::vector<Span> CapitalizedRunsDetector::Detect(const Document &doc,
                                                  size_t sentence_index) const {
  return Detect(doc.sentences.at(sentence_index));
}

std::vector<Span> DetectNamedEntities(const Sentence &sentence) {
  return CapitalizedRunsDetector().Detect(sentence);
}

SpanIndex ParseSpanFile(std::string_view content) {
  SpanIndex index;
  size_t line_number = 0;
  for (std::string_view line : SplitLines(content)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j["id"].is_string() || !j.contains("sentences") ||
        !j["sentences"].is_array()) {
      throw ParseError(fmt::format(
          "line {}: expected {{\"id\": str, \"sentences\": [[{{\"a\",\"b\"}}]]}}",
          line_number));
    }
    auto &dst = index[j["id"].get<std::string>()];
    dst.clear();
    for (const auto &js : j["sentences"]) {
      if (!js.is_array()) {
        throw ParseError(fmt::format("line {}: sentence entry must be an array",
                                     line_number));
      }
      auto &spans = dst.emplace_back();
      for (const auto &jsp : js) {
        if (!jsp.is_object() || !jsp.contains("a") || !jsp.contains("b") ||
            !jsp["a"].is_number_unsigned() || !jsp["b"].is_number_unsigned()) {
          throw ParseError(fmt::format(
              "line {}: span needs non-negative integer \"a\" and \"b\"", line_number));
        }
        spans.push_back(Span{jsp["a"].get<size_t>(), jsp["b"].get<size_t>(),
                             std::nullopt});
      }
    }
  }
  return index;
}

SpanIndex LoadSpanFile(const std::string &path) { return ParseSpanFile(ReadFile(path)); }

std::vector<Span> FileEntityDetector::Detect(const Document &doc,
                                             size_t sentence_index) const {
  auto it = spans_.find(doc.id);
  if (it == spans_.end() || sentence_index >= it->second.size()) return {};
  const size_t n = doc.sentences.at(sentence_index).tokens.size();
  std::vector<Span> valid;
  for (const Span &s : it->second[sentence_index]) {
    if (s.begin < s.end && s.end <= n) {
      valid.push_back(s);
    } else {
      Log(LogLevel::kWarning, "document \"{}\" sentence {}: NE span [{}, {}) out of range",
          doc.id, sentence_index, s.begin, s.end);
    }
  }
  return SelectDisjoint(std::move(valid));
}

std::unique_ptr<EntityDetector> MakeEntityDetector(const std::string &id) {
  if (id == "capitalized-runs") return std::make_unique<CapitalizedRunsDetector>();
  if (id.starts_with("file:")) {
    return std::make_unique<FileEntityDetector>(LoadSpanFile(id.substr(5)));
  }
  throw ConfigError(fmt::format("unknown NER plug-in \"{}\"", id));
}

// ---- Patterns and distinctiveness ------------------------------------------

std::vector<PatternMatch> MatchPatterns(const Sentence &sentence, size_t begin,
                                        size_t end) {
  const auto &toks = sentence.tokens;
  end = std::min(end, toks.size());
  std::vector<PatternMatch> out;
  for (size_t start = begin; start < end; ++start) {
    for (const PosPattern &p : AllPatterns()) {
      if (start + p.arity() > end) continue;
      bool ok = true;
      for (size_t k = 0; k < p.arity() && ok; ++k) {
        ok = MatchesSlot(p.slots[k], toks[start + k]);
      }
      if (!ok) continue;
      std::vector<std::string> items;
      for (size_t k = 0; k < p.arity(); ++k) {
        items.push_back(KeyItem(toks[start + k].surface, toks[start + k].pos));
      }
      out.push_back(PatternMatch{Span{start, start + p.arity(), std::nullopt}, &p,
                                 NgramKey(std::move(items))});
    }
  }
  return out;
}

MatchAngles ComputeAngles(const FrequencyTable &table, const NgramKey &key,
                          int grid_h) {
  MatchAngles angles;
  for (VaryingSlot slot : {VaryingSlot::kHead, VaryingSlot::kTail}) {
    try {
      NeighborCurve curve = BuildNeighborCurve(table, key, slot);
      double a = TangentialAngle(curve, curve.focus_index, grid_h);
      (slot == VaryingSlot::kHead ? angles.head : angles.tail) = a;
    } catch (const DistinctivenessUnavailable &) {
    }
  }
  return angles;
}

std::vector<PatternMatch> FilterDistinctive(const std::vector<PatternMatch> &matches,
                                            const FrequencyTable &table,
                                            const AnnotatorConfig &config) {
  std::vector<PatternMatch> kept;
  for (const PatternMatch &m : matches) {
    MatchAngles a = ComputeAngles(table, m.key, config.grid_h);
    if (!a.head && !a.tail) continue;
    // A missing direction borrows the available angle.
    const double head = a.head.value_or(*a.tail);
    const double tail = a.tail.value_or(*a.head);
    if (IsDistinctive(head, tail, config.alpha_min1, config.alpha_min2)) {
      kept.push_back(m);
    }
  }
  return kept;
}

std::vector<Span> CombineMatches(const Sentence &sentence,
                                 const std::vector<PatternMatch> &matches) {
  DisjointSets sets(matches.size());
  for (size_t i = 0; i < matches.size(); ++i) {
    for (size_t j = i + 1; j < matches.size(); ++j) {
      if (matches[i].span.Overlaps(matches[j].span)) sets.Union(i, j);
    }
  }
  std::map<size_t, Span> groups;
  for (size_t i = 0; i < matches.size(); ++i) {
    const Span &s = matches[i].span;
    auto [it, inserted] = groups.try_emplace(sets.Find(i), s);
    if (!inserted) {
      it->second.begin = std::min(it->second.begin, s.begin);
      it->second.end = std::max(it->second.end, s.end);
    }
  }
  std::vector<Span> out;
  for (auto &[root, span] : groups) {
    while (span.end > span.begin && !IsNounTag(sentence.tokens[span.end - 1].pos)) {
      --span.end;
    }
    if (span.end > span.begin) out.push_back(span);
  }
  std::sort(out.begin(), out.end(),
            [](const Span &a, const Span &b) { return a.begin < b.begin; });
  return out;
}

std::vector<Span> RecoverSingleTokens(const Sentence &sentence,
                                      const std::vector<Span> &used) {
  std::vector<bool> covered(sentence.tokens.size(), false);
  for (const Span &s : used) {
    for (size_t i = s.begin; i < s.end && i < covered.size(); ++i) covered[i] = true;
  }
  std::vector<Span> out;
  for (size_t i = 0; i < sentence.tokens.size(); ++i) {
    const std::string &pos = sentence.tokens[i].pos;
    if (!covered[i] && (IsNounTag(pos) || pos == "CD")) {
      out.push_back(Span{i, i + 1, std::nullopt});
    }
  }
  return out;
}

// ---- Pipeline --------------------------------------------------------------

WeakAnnotator::WeakAnnotator(const FrequencyTable &table, AnnotatorConfig config)
    : table_(table), config_(std::move(config)) {
  config_.Validate();
  detector_ = MakeEntityDetector(config_.ner);
}

WeakAnnotator::WeakAnnotator(const FrequencyTable &table, AnnotatorConfig config,
                             std::unique_ptr<EntityDetector> detector)
    : table_(table), config_(std::move(config)), detector_(std::move(detector)) {
  config_.Validate();
  if (!detector_) throw ConfigError("null entity detector");
}

std::vector<Span> WeakAnnotator::AnnotateSentence(const Document &doc,
                                                  size_t sentence_index,
                                                  AnnotationStats *stats) const {
  const Sentence &sentence = doc.sentences.at(sentence_index);
  for (size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (sentence.tokens[i].pos.empty()) {
      throw ValidationError(fmt::format(
          "document \"{}\" sentence {} token {}: untagged token", doc.id,
          sentence_index, i));
    }
  }
  std::vector<Span> entities = detector_->Detect(doc, sentence_index);
  std::vector<Span> spans = entities;

  std::vector<bool> in_entity(sentence.tokens.size(), false);
  for (const Span &e : entities) {
    for (size_t i = e.begin; i < e.end; ++i) in_entity[i] = true;
  }
  size_t multi = 0;
  size_t i = 0;
  while (i < sentence.tokens.size()) {
    if (in_entity[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < sentence.tokens.size() && !in_entity[j]) ++j;
    std::vector<PatternMatch> matches = MatchPatterns(sentence, i, j);
    std::vector<PatternMatch> kept = FilterDistinctive(matches, table_, config_);
    for (Span &s : CombineMatches(sentence, kept)) {
      spans.push_back(std::move(s));
      ++multi;
    }
    i = j;
  }
  std::vector<Span> singles = RecoverSingleTokens(sentence, spans);
  if (stats != nullptr) {
    stats->named_entities += entities.size();
    stats->multi_token += multi;
    stats->single_token += singles.size();
  }
  spans.insert(spans.end(), singles.begin(), singles.end());
  std::sort(spans.begin(), spans.end(),
            [](const Span &a, const Span &b) { return a.begin < b.begin; });
  return spans;
}

Document WeakAnnotator::Annotate(const Document &doc, AnnotationStats *stats) const {
  Document out = doc;
  for (size_t si = 0; si < out.sentences.size(); ++si) {
    out.sentences[si].concepts = AnnotateSentence(doc, si, stats);
  }
  out.kind = AnnotationKind::kDenseWeak;
  return out;
}

Document MergeExternalAnnotations(const Document &doc,
                                  const std::vector<std::vector<Span>> &external,
                                  MergeDiagnostics *diagnostics) {
  Document out = doc;
  auto reject = [&](std::string msg) {
    Log(LogLevel::kWarning, "{}", msg);
    if (diagnostics != nullptr) diagnostics->rejected.push_back(std::move(msg));
  };
  for (size_t si = 0; si < external.size(); ++si) {
    if (si >= out.sentences.size()) {
      reject(fmt::format("document \"{}\": external spans for missing sentence {}",
                         doc.id, si));
      continue;
    }
    Sentence &s = out.sentences[si];
    std::vector<Span> candidates = s.concepts;
    for (const Span &e : external[si]) {
      if (e.begin >= e.end || e.end > s.tokens.size()) {
        reject(fmt::format("document \"{}\" sentence {}: span [{}, {}) outside {} tokens",
                           doc.id, si, e.begin, e.end, s.tokens.size()));
        continue;
      }
      candidates.push_back(e);
    }
    s.concepts = SelectDisjoint(std::move(candidates));
  }
  out.kind = AnnotationKind::kDenseWeak;
  return out;
}

}  // namespace conex
