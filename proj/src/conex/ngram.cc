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

#include "conex/ngram.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "conex/corpus.h"
#include "conex/util.h"

namespace conex {

NgramKey::NgramKey(std::vector<std::string> it) : items(std::move(it)) {
  if (items.size() < 2 || items.size() > 4) {
    throw std::invalid_argument(
        fmt::format("n-gram must have 2 to 4 items, got {}", items.size()));
  }
}

NgramKey NgramKey::Parse(std::string_view text) {
  return NgramKey(SplitWhitespace(text));
}

std::string NgramKey::ToString() const {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ' ';
    out += items[i];
  }
  return out;
}

std::string CoarseTag(std::string_view tag, std::string_view surface) {
  if (ToLower(surface) == "of") return "of";
  if (tag.starts_with("NN")) return "NOUN";
  if (tag.starts_with("JJ")) return "ADJ";
  if (tag.starts_with("VB")) return "VERB";
  if (tag == "CD") return "NUM";
  if (tag == "DT") return "DT";
  return "";
}

std::string KeyItem(std::string_view surface, std::string_view ptb_tag) {
  std::string coarse = CoarseTag(ptb_tag, surface);
  if (coarse == "of") return "of";
  return ToLower(surface) + "_" + coarse;
}

std::string ItemClass(std::string_view item) {
  size_t us = item.rfind('_');
  if (us == std::string_view::npos) return std::string(item);
  return std::string(item.substr(us + 1));
}

std::string FrequencyTable::FamilyIndexKey(const NgramKey &key,
                                           VaryingSlot slot) const {
  const auto &it = key.items;
  std::string out = std::to_string(it.size());
  out += '|';
  if (slot == VaryingSlot::kHead) {
    out += ItemClass(it.front());
    for (size_t i = 1; i < it.size(); ++i) {
      out += ' ';
      out += it[i];
    }
  } else {
    for (size_t i = 0; i + 1 < it.size(); ++i) {
      out += it[i];
      out += ' ';
    }
    out += ItemClass(it.back());
  }
  return out;
}

void FrequencyTable::Add(const NgramKey &key, uint64_t count) {
  if (count == 0) {
    throw std::invalid_argument(
        fmt::format("n-gram \"{}\" stored with count 0", key.ToString()));
  }
  std::string k = key.ToString();
  auto it = by_key_.find(k);
  if (it != by_key_.end()) {
    entries_[it->second].second = count;
    return;
  }
  const size_t idx = entries_.size();
  entries_.emplace_back(key, count);
  by_key_.emplace(std::move(k), idx);
  head_families_[FamilyIndexKey(key, VaryingSlot::kHead)].push_back(idx);
  tail_families_[FamilyIndexKey(key, VaryingSlot::kTail)].push_back(idx);
}

std::optional<uint64_t> FrequencyTable::Find(const NgramKey &key) const {
  auto it = by_key_.find(key.ToString());
  if (it == by_key_.end()) return std::nullopt;
  return entries_[it->second].second;
}

std::vector<std::pair<NgramKey, uint64_t>> FrequencyTable::Family(
    const NgramKey &key, VaryingSlot slot) const {
  const auto &index = slot == VaryingSlot::kHead ? head_families_ : tail_families_;
  std::vector<std::pair<NgramKey, uint64_t>> out;
  auto it = index.find(FamilyIndexKey(key, slot));
  if (it == index.end()) return out;
  out.reserve(it->second.size());
  for (size_t idx : it->second) out.push_back(entries_[idx]);
  return out;
}

FrequencyTable ParseFrequencyTable(std::string_view content) {
  FrequencyTable table;
  bool have_rows = false;
  size_t line_number = 0;
  for (std::string_view raw : SplitLines(content)) {
    ++line_number;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::vector<std::string> parts = SplitWhitespace(line);
      if (parts.size() == 2 && parts[0] == "#total_documents") {
        if (have_rows) {
          throw ParseError(fmt::format(
              "line {}: #total_documents must precede the rows", line_number));
        }
        uint64_t total = 0;
        auto [p, ec] = std::from_chars(parts[1].data(),
                                       parts[1].data() + parts[1].size(), total);
        if (ec != std::errc() || p != parts[1].data() + parts[1].size() ||
            total == 0) {
          throw ParseError(fmt::format(
              "line {}: #total_documents needs a positive integer", line_number));
        }
        table = FrequencyTable(total);
      }
      continue;
    }
    size_t tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(fmt::format("line {}: expected \"items<TAB>count\"",
                                   line_number));
    }
    std::vector<std::string> items = SplitWhitespace(line.substr(0, tab));
    if (items.size() < 2 || items.size() > 4) {
      throw ParseError(fmt::format("line {}: n-gram must have 2 to 4 items",
                                   line_number));
    }
    std::string_view count_text = Trim(line.substr(tab + 1));
    uint64_t count = 0;
    auto [p, ec] = std::from_chars(count_text.data(),
                                   count_text.data() + count_text.size(), count);
    if (ec != std::errc() || p != count_text.data() + count_text.size() ||
        count == 0) {
      throw ParseError(fmt::format("line {}: count must be a positive integer",
                                   line_number));
    }
    table.Add(NgramKey(std::move(items)), count);
    have_rows = true;
  }
  return table;
}

FrequencyTable LoadFrequencyTable(const std::string &path) {
  return ParseFrequencyTable(ReadFile(path));
}

std::vector<double> NormalizeCounts(const std::vector<uint64_t> &counts) {
  std::vector<double> out(counts.size(), 0.0);
  if (counts.empty()) return out;
  auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  if (*lo == *hi) return out;
  const double scale = static_cast<double>(counts.size() - 1) /
                       static_cast<double>(*hi - *lo);
  for (size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i] - *lo) * scale;
  }
  return out;
}

NeighborCurve BuildNeighborCurve(const FrequencyTable &table, const NgramKey &key,
                                 VaryingSlot slot) {
  if (!table.Find(key)) {
    throw DistinctivenessUnavailable(
        fmt::format("n-gram \"{}\" is not in the frequency table", key.ToString()));
  }
  auto family = table.Family(key, slot);
  std::sort(family.begin(), family.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  NeighborCurve curve;
  curve.varying_slot = slot;
  std::vector<uint64_t> counts;
  counts.reserve(family.size());
  for (const auto &[k, c] : family) counts.push_back(c);
  std::vector<double> freq = NormalizeCounts(counts);
  for (size_t i = 0; i < family.size(); ++i) {
    if (family[i].first == key) curve.focus_index = i;
    curve.points.push_back(CurvePoint{family[i].first, family[i].second, freq[i]});
  }
  return curve;
}

size_t GridStep(size_t curve_length, size_t index, int grid) {
  const size_t g = static_cast<size_t>(std::max(grid, 1));
  return std::min({g, index, curve_length - 1 - index});
}

double TangentialAngle(const std::vector<double> &f, size_t index, int grid) {
  const size_t n = f.size();
  if (index >= n) {
    throw std::out_of_range(fmt::format("curve index {} out of range for {} points",
                                        index, n));
  }
  if (n == 1) {
    Log(LogLevel::kDebug, "degenerate one-point curve, angle 0");
    return 0.0;
  }
  const size_t h = GridStep(n, index, grid);
  double slope;
  if (h == 0) {
    slope = index == 0 ? f[1] - f[0] : f[n - 1] - f[n - 2];
  } else {
    slope = (f[index + h] - f[index - h]) / (2.0 * static_cast<double>(h));
  }
  return std::atan(slope) * 180.0 / std::numbers::pi;
}

double TangentialAngle(const NeighborCurve &curve, size_t index, int grid) {
  std::vector<double> f;
  f.reserve(curve.points.size());
  for (const CurvePoint &p : curve.points) f.push_back(p.frequency);
  return TangentialAngle(f, index, grid);
}

bool IsDistinctive(double alpha1, double alpha2, double alpha_min1,
                   double alpha_min2) {
  return std::max(alpha1, alpha2) >= alpha_min1 &&
         std::min(alpha1, alpha2) >= alpha_min2;
}

bool IsDistinctive(std::optional<double> alpha1, std::optional<double> alpha2,
                   double alpha_min1, double alpha_min2) {
  if (alpha1 && alpha2) return IsDistinctive(*alpha1, *alpha2, alpha_min1, alpha_min2);
  if (!alpha1 && !alpha2) return false;
  const double present = alpha1 ? *alpha1 : *alpha2;
  return present >= alpha_min1 && present >= alpha_min2 && alpha_min2 <= 0.0;
}

}  // namespace conex
