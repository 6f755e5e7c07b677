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

// Demo-quality tokenizer and tagger for untagged input. Real inputs are
// expected to arrive already tokenized and tagged.

#include <cctype>
#include <string>
#include <unordered_map>

#include "conex/corpus.h"
#include "conex/util.h"

namespace conex {

namespace {

const std::unordered_map<std::string, std::string> &Lexicon() {
  static const auto *lex = new std::unordered_map<std::string, std::string>{
      {"the", "DT"}, {"a", "DT"}, {"an", "DT"}, {"this", "DT"},
      {"that", "DT"}, {"these", "DT"}, {"those", "DT"}, {"each", "DT"},
      {"every", "DT"}, {"some", "DT"}, {"any", "DT"}, {"no", "DT"},
      {"all", "DT"}, {"both", "DT"},
      {"of", "IN"}, {"in", "IN"}, {"on", "IN"}, {"at", "IN"}, {"by", "IN"},
      {"for", "IN"}, {"with", "IN"}, {"from", "IN"}, {"into", "IN"},
      {"over", "IN"}, {"under", "IN"}, {"about", "IN"}, {"after", "IN"},
      {"before", "IN"}, {"between", "IN"}, {"through", "IN"},
      {"during", "IN"}, {"without", "IN"}, {"within", "IN"},
      {"against", "IN"}, {"among", "IN"}, {"as", "IN"}, {"than", "IN"},
      {"to", "TO"},
      {"and", "CC"}, {"or", "CC"}, {"but", "CC"}, {"nor", "CC"},
      {"he", "PRP"}, {"she", "PRP"}, {"it", "PRP"}, {"they", "PRP"},
      {"we", "PRP"}, {"i", "PRP"}, {"you", "PRP"}, {"them", "PRP"},
      {"him", "PRP"},
      {"his", "PRP$"}, {"her", "PRP$"}, {"its", "PRP$"}, {"their", "PRP$"},
      {"our", "PRP$"}, {"my", "PRP$"}, {"your", "PRP$"},
      {"is", "VBZ"}, {"are", "VBP"}, {"was", "VBD"}, {"were", "VBD"},
      {"be", "VB"}, {"been", "VBN"}, {"being", "VBG"}, {"has", "VBZ"},
      {"have", "VBP"}, {"had", "VBD"}, {"does", "VBZ"}, {"do", "VBP"},
      {"did", "VBD"},
      {"will", "MD"}, {"would", "MD"}, {"can", "MD"}, {"could", "MD"},
      {"may", "MD"}, {"might", "MD"}, {"shall", "MD"}, {"should", "MD"},
      {"must", "MD"},
      {"not", "RB"}, {"also", "RB"}, {"very", "RB"}, {"often", "RB"},
      {"which", "WDT"}, {"who", "WP"}, {"where", "WRB"}, {"when", "WRB"},
      {"one", "CD"}, {"two", "CD"}, {"three", "CD"}, {"four", "CD"},
      {"five", "CD"}, {"six", "CD"}, {"seven", "CD"}, {"eight", "CD"},
      {"nine", "CD"}, {"ten", "CD"},
  };
  return *lex;
}

bool IsAlpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// "U.S.", "e.g." and similar letter-dot sequences.
bool IsAbbreviation(std::string_view s) {
  if (s.size() < 4 || s.size() % 2 != 0) return false;
  for (size_t i = 0; i < s.size(); i += 2) {
    if (!IsAlpha(s[i]) || s[i + 1] != '.') return false;
  }
  return true;
}

bool IsNumber(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (IsDigit(c)) {
      digit = true;
    } else if (c != ',' && c != '.' && c != '-') {
      return false;
    }
  }
  return digit;
}

bool IsLeadingPunct(char c) { return c == '(' || c == '[' || c == '"' || c == '\''; }
bool IsTrailingPunct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
         c == ')' || c == ']' || c == '"' || c == '\'';
}

std::string PunctTag(std::string_view s) {
  if (s == "(" || s == "[") return "-LRB-";
  if (s == ")" || s == "]") return "-RRB-";
  if (s == "\"" || s == "'") return "''";
  if (s == "?" || s == "!") return ".";
  return std::string(s);
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.ends_with(suffix);
}

std::string TagWord(std::string_view word, bool sentence_initial) {
  if (word.size() == 1 && !IsAlpha(word[0]) && !IsDigit(word[0])) {
    return PunctTag(word);
  }
  if (IsNumber(word)) return "CD";
  std::string lower = ToLower(word);
  auto it = Lexicon().find(lower);
  const bool capitalized = std::isupper(static_cast<unsigned char>(word[0])) != 0;
  if (it != Lexicon().end() && (!capitalized || sentence_initial)) return it->second;
  if (capitalized) return "NNP";
  if (EndsWith(lower, "ly")) return "RB";
  if (EndsWith(lower, "ing")) return "VBG";
  if (EndsWith(lower, "ed")) return "VBN";
  for (std::string_view adj : {"ous", "ful", "ive", "able", "ible", "al", "ic",
                               "ish", "less", "ant", "ent", "ary"}) {
    if (EndsWith(lower, adj)) return "JJ";
  }
  if (EndsWith(lower, "s") && !EndsWith(lower, "ss") && !EndsWith(lower, "us")) {
    return "NNS";
  }
  return "NN";
}

}  // namespace

std::vector<Token> TokenizeAndTag(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    size_t b = i, e = j;
    std::vector<std::pair<size_t, size_t>> pieces;
    while (b < e && e - b > 1 && IsLeadingPunct(text[b])) {
      pieces.emplace_back(b, b + 1);
      ++b;
    }
    std::vector<std::pair<size_t, size_t>> tail;
    while (e > b + 1 && IsTrailingPunct(text[e - 1]) &&
           !IsAbbreviation(text.substr(b, e - b))) {
      tail.emplace_back(e - 1, e);
      --e;
    }
    if (e > b) pieces.emplace_back(b, e);
    pieces.insert(pieces.end(), tail.rbegin(), tail.rend());
    for (auto [s, t] : pieces) {
      tokens.push_back(Token{std::string(text.substr(s, t - s)), "", s, t});
    }
    i = j;
  }
  bool initial = true;
  for (Token &t : tokens) {
    t.pos = TagWord(t.surface, initial);
    initial = t.surface == "." || t.surface == "?" || t.surface == "!";
  }
  return tokens;
}

}  // namespace conex
