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

#include "conex/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "conex/util.h"

namespace conex {

using ordered_json = nlohmann::ordered_json;

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

size_t GetIndex(const ordered_json &obj, const char *key, size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(fmt::format("line {}: missing field \"{}\"", line, key));
  }
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ParseError(fmt::format(
        "line {}: field \"{}\" must be a non-negative integer", line, key));
  }
  return it->get<size_t>();
}

std::string GetString(const ordered_json &obj, const char *key, size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(
        fmt::format("line {}: missing string field \"{}\"", line, key));
  }
  return it->get<std::string>();
}

const ordered_json &GetArray(const ordered_json &obj, const char *key,
                             size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw ParseError(
        fmt::format("line {}: missing array field \"{}\"", line, key));
  }
  return *it;
}

}  // namespace

std::string Sentence::SurfaceOf(size_t begin, size_t end) const {
  std::string out;
  for (size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (i > begin) out += ' ';
    out += tokens[i].surface;
  }
  return out;
}

const char *AnnotationKindName(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::kNone: return "none";
    case AnnotationKind::kSparseGold: return "sparse_gold";
    case AnnotationKind::kDenseWeak: return "dense_weak";
    case AnnotationKind::kPredicted: return "predicted";
  }
  return "none";
}

AnnotationKind ParseAnnotationKind(std::string_view name) {
  if (name == "none") return AnnotationKind::kNone;
  if (name == "sparse_gold") return AnnotationKind::kSparseGold;
  if (name == "dense_weak") return AnnotationKind::kDenseWeak;
  if (name == "predicted") return AnnotationKind::kPredicted;
  throw ParseError(fmt::format("unknown annotation kind \"{}\"", name));
}

size_t Document::ConceptCount() const {
  size_t n = 0;
  for (const Sentence &s : sentences) n += s.concepts.size();
  return n;
}

DocumentFormat ParseDocumentFormat(std::string_view name) {
  if (name == "jsonl") return DocumentFormat::kJsonl;
  if (name == "conll" || name == "conll_tsv" || name == "tsv") {
    return DocumentFormat::kConllTsv;
  }
  throw std::invalid_argument(fmt::format("unknown document format \"{}\"", name));
}

void ValidateDocument(const Document &doc) {
  const std::string &text = doc.text;
  size_t cursor = 0;
  for (size_t si = 0; si < doc.sentences.size(); ++si) {
    const Sentence &s = doc.sentences[si];
    for (size_t ti = 0; ti < s.tokens.size(); ++ti) {
      const Token &t = s.tokens[ti];
      auto where = [&] {
        return fmt::format("document \"{}\" sentence {} token {}", doc.id, si, ti);
      };
      if (t.char_start >= t.char_end) {
        throw ValidationError(fmt::format("{}: char_start {} not before char_end {}",
                                          where(), t.char_start, t.char_end));
      }
      if (t.char_end > text.size()) {
        throw ValidationError(fmt::format("{}: offset {} beyond text length {}",
                                          where(), t.char_end, text.size()));
      }
      if (t.char_start < cursor) {
        throw ValidationError(fmt::format("{}: tokens overlap or are out of order",
                                          where()));
      }
      for (size_t c = cursor; c < t.char_start; ++c) {
        if (!IsSpace(text[c])) {
          throw ValidationError(fmt::format(
              "{}: non-whitespace text at byte {} not covered by a token",
              where(), c));
        }
      }
      if (text.compare(t.char_start, t.char_end - t.char_start, t.surface) != 0) {
        throw ValidationError(fmt::format("{}: surface \"{}\" does not match text",
                                          where(), t.surface));
      }
      if (t.pos.empty()) {
        throw ValidationError(fmt::format("{}: empty PoS tag", where()));
      }
      cursor = t.char_end;
    }
    for (const Span &sp : s.concepts) {
      if (sp.begin >= sp.end || sp.end > s.tokens.size()) {
        throw ValidationError(fmt::format(
            "document \"{}\" sentence {}: span [{}, {}) outside {} tokens",
            doc.id, si, sp.begin, sp.end, s.tokens.size()));
      }
    }
  }
  for (size_t c = cursor; c < text.size(); ++c) {
    if (!IsSpace(text[c])) {
      throw ValidationError(fmt::format(
          "document \"{}\": trailing text at byte {} not covered by a token",
          doc.id, c));
    }
  }
  if (doc.kind == AnnotationKind::kNone && doc.ConceptCount() > 0) {
    throw ValidationError(fmt::format(
        "document \"{}\": kind \"none\" but {} concept spans", doc.id,
        doc.ConceptCount()));
  }
}

Document ParseJsonlDocument(std::string_view line, size_t line_number) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(fmt::format("line {}: {}", line_number, e.what()));
  }
  if (!j.is_object()) {
    throw ParseError(fmt::format("line {}: expected a JSON object", line_number));
  }
  Document doc;
  doc.id = GetString(j, "id", line_number);
  doc.text = GetString(j, "text", line_number);
  if (j.contains("kind")) {
    try {
      doc.kind = ParseAnnotationKind(GetString(j, "kind", line_number));
    } catch (const ParseError &e) {
      throw ParseError(fmt::format("line {}: {}", line_number, e.what()));
    }
  }
  for (const auto &js : GetArray(j, "sentences", line_number)) {
    Sentence s;
    for (const auto &jt : GetArray(js, "tokens", line_number)) {
      Token t;
      t.surface = GetString(jt, "t", line_number);
      t.pos = GetString(jt, "pos", line_number);
      t.char_start = GetIndex(jt, "s", line_number);
      t.char_end = GetIndex(jt, "e", line_number);
      s.tokens.push_back(std::move(t));
    }
    if (js.contains("concepts")) {
      for (const auto &jc : GetArray(js, "concepts", line_number)) {
        Span sp;
        sp.begin = GetIndex(jc, "a", line_number);
        sp.end = GetIndex(jc, "b", line_number);
        if (jc.contains("label")) sp.label = GetString(jc, "label", line_number);
        s.concepts.push_back(std::move(sp));
      }
    }
    doc.sentences.push_back(std::move(s));
  }
  try {
    ValidateDocument(doc);
  } catch (const ValidationError &e) {
    throw ValidationError(fmt::format("line {}: {}", line_number, e.what()));
  }
  return doc;
}

std::string SerializeDocument(const Document &doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  ordered_json sentences = ordered_json::array();
  for (const Sentence &s : doc.sentences) {
    ordered_json js;
    ordered_json tokens = ordered_json::array();
    for (const Token &t : s.tokens) {
      ordered_json jt;
      jt["t"] = t.surface;
      jt["pos"] = t.pos;
      jt["s"] = t.char_start;
      jt["e"] = t.char_end;
      tokens.push_back(std::move(jt));
    }
    js["tokens"] = std::move(tokens);
    ordered_json concepts = ordered_json::array();
    for (const Span &sp : s.concepts) {
      ordered_json jc;
      jc["a"] = sp.begin;
      jc["b"] = sp.end;
      if (sp.label) jc["label"] = *sp.label;
      concepts.push_back(std::move(jc));
    }
    js["concepts"] = std::move(concepts);
    sentences.push_back(std::move(js));
  }
  j["sentences"] = std::move(sentences);
  j["kind"] = AnnotationKindName(doc.kind);
  return j.dump();
}

Document DocumentFromTokens(
    std::string id,
    const std::vector<std::vector<std::pair<std::string, std::string>>>
        &sentences) {
  Document doc;
  doc.id = std::move(id);
  for (size_t si = 0; si < sentences.size(); ++si) {
    if (si > 0) doc.text += '\n';
    Sentence s;
    for (size_t ti = 0; ti < sentences[si].size(); ++ti) {
      if (ti > 0) doc.text += ' ';
      const auto &[surface, pos] = sentences[si][ti];
      Token t{surface, pos, doc.text.size(), doc.text.size() + surface.size()};
      doc.text += surface;
      s.tokens.push_back(std::move(t));
    }
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

std::vector<Document> ParseConll(std::string_view content, std::string_view name) {
  struct Row {
    std::string surface, pos, tag;
    size_t line;
  };
  std::vector<std::vector<std::vector<Row>>> docs(1);
  std::vector<Row> current;
  auto flush_sentence = [&] {
    if (!current.empty()) docs.back().push_back(std::move(current));
    current.clear();
  };
  size_t line_number = 0;
  for (std::string_view line : SplitLines(content)) {
    ++line_number;
    std::string_view trimmed = Trim(line);
    if (trimmed.empty()) {
      flush_sentence();
      continue;
    }
    if (trimmed.starts_with("-DOCSTART-")) {
      flush_sentence();
      if (!docs.back().empty()) docs.emplace_back();
      continue;
    }
    std::vector<std::string> cols = SplitString(std::string(trimmed), '\t');
    if (cols.size() < 2 || cols[0].empty() || cols[1].empty()) {
      throw ParseError(fmt::format(
          "line {}: expected \"surface<TAB>POS<TAB>BIO\", got \"{}\"",
          line_number, trimmed));
    }
    std::string tag = cols.size() >= 3 ? cols.back() : "O";
    if (tag != "O" && !tag.starts_with("B-") && !tag.starts_with("I-") &&
        tag != "B" && tag != "I") {
      throw ParseError(fmt::format("line {}: bad BIO tag \"{}\"", line_number, tag));
    }
    if (cols[0].find_first_of(" \t\r\n") != std::string::npos) {
      throw ParseError(fmt::format("line {}: token contains whitespace", line_number));
    }
    current.push_back(Row{cols[0], cols[1], tag, line_number});
  }
  flush_sentence();
  if (docs.back().empty() && docs.size() > 1) docs.pop_back();

  std::vector<Document> out;
  for (size_t di = 0; di < docs.size(); ++di) {
    if (docs[di].empty()) continue;
    std::vector<std::vector<std::pair<std::string, std::string>>> toks;
    for (const auto &sent : docs[di]) {
      auto &dst = toks.emplace_back();
      for (const Row &r : sent) dst.emplace_back(r.surface, r.pos);
    }
    Document doc = DocumentFromTokens(
        docs.size() == 1 ? std::string(name) : fmt::format("{}-{}", name, di),
        toks);
    for (size_t si = 0; si < docs[di].size(); ++si) {
      const auto &sent = docs[di][si];
      std::optional<Span> open;
      auto close = [&] {
        if (open) doc.sentences[si].concepts.push_back(*open);
        open.reset();
      };
      for (size_t ti = 0; ti < sent.size(); ++ti) {
        const std::string &tag = sent[ti].tag;
        if (tag == "O") {
          close();
          continue;
        }
        std::string label = tag.size() > 2 ? tag.substr(2) : "";
        bool begins = tag[0] == 'B' || !open ||
                      open->label.value_or("CON") != (label.empty() ? "CON" : label);
        if (begins) {
          close();
          open = Span{ti, ti + 1, std::nullopt};
          if (!label.empty() && label != "CON") open->label = label;
        } else {
          open->end = ti + 1;
        }
      }
      close();
    }
    doc.kind = doc.ConceptCount() > 0 ? AnnotationKind::kSparseGold
                                      : AnnotationKind::kNone;
    out.push_back(std::move(doc));
  }
  return out;
}

std::vector<Document> ParseDocuments(std::string_view content,
                                     DocumentFormat format,
                                     std::string_view name) {
  if (format == DocumentFormat::kConllTsv) return ParseConll(content, name);
  std::vector<Document> docs;
  size_t line_number = 0;
  for (std::string_view line : SplitLines(content)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    // Optional leading header record carrying the format tag and run info.
    if (docs.empty() && line.find("\"format\"") != std::string_view::npos) {
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_object() && j.contains("format") && !j.contains("sentences")) {
        continue;
      }
    }
    docs.push_back(ParseJsonlDocument(line, line_number));
  }
  return docs;
}

std::vector<Document> LoadDocuments(const std::string &path,
                                    DocumentFormat format) {
  std::string content = ReadFile(path);
  return ParseDocuments(content, format, FileStem(path));
}

void WriteDocuments(const std::string &path, const std::vector<Document> &docs,
                    const std::string &header) {
  std::string out;
  if (!header.empty()) {
    out += header;
    out += '\n';
  }
  for (const Document &d : docs) {
    out += SerializeDocument(d);
    out += '\n';
  }
  WriteFile(path, out);
}

std::vector<std::pair<size_t, size_t>> SplitSentences(
    const std::vector<Token> &tokens) {
  std::vector<std::pair<size_t, size_t>> out;
  size_t begin = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string &s = tokens[i].surface;
    bool terminal = s == "." || s == "?" || s == "!";
    bool next_upper = i + 1 < tokens.size() &&
                      std::isupper(static_cast<unsigned char>(tokens[i + 1].surface[0]));
    if (terminal && next_upper) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < tokens.size()) out.emplace_back(begin, tokens.size());
  return out;
}

Document MakeDocument(std::string id, std::string text, std::vector<Token> tokens) {
  Document doc;
  doc.id = std::move(id);
  doc.text = std::move(text);
  for (auto [b, e] : SplitSentences(tokens)) {
    Sentence s;
    s.tokens.assign(tokens.begin() + b, tokens.begin() + e);
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

std::vector<Span> SelectDisjoint(std::vector<Span> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Span &a, const Span &b) {
                     if (a.begin != b.begin) return a.begin < b.begin;
                     return a.length() > b.length();
                   });
  std::vector<Span> out;
  size_t cursor = 0;
  for (Span &c : candidates) {
    if (c.begin < cursor || c.begin >= c.end) continue;
    cursor = c.end;
    out.push_back(std::move(c));
  }
  return out;
}

ResolveResult ResolveSpans(const Sentence &sentence,
                           const std::vector<std::string> &concepts) {
  ResolveResult result;
  std::vector<Span> candidates;
  const auto &toks = sentence.tokens;
  for (const std::string &text : concepts) {
    std::vector<std::string> parts = SplitWhitespace(text);
    bool found = false;
    if (!parts.empty() && parts.size() <= toks.size()) {
      for (size_t b = 0; b + parts.size() <= toks.size(); ++b) {
        bool match = true;
        for (size_t k = 0; k < parts.size() && match; ++k) {
          match = toks[b + k].surface == parts[k];
        }
        if (match) {
          candidates.push_back(Span{b, b + parts.size(), std::nullopt});
          found = true;
        }
      }
    }
    if (!found) result.unmatched.push_back(text);
  }
  result.spans = SelectDisjoint(std::move(candidates));
  return result;
}

}  // namespace conex
