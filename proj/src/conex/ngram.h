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

// N-gram document frequencies and the tangential-angle measure of how far an
// n-gram stands out from the family of n-grams that differ from it in one
// open-class slot.

#ifndef CONEX_NGRAM_H_
#define CONEX_NGRAM_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace conex {

// The queried n-gram has no entry in the frequency table.
class DistinctivenessUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// PoS-suffixed items, e.g. {"reinforced_ADJ", "concrete_NOUN"}. The first
// and last items are the open-class slots.
struct NgramKey {
  std::vector<std::string> items;

  NgramKey() = default;
  explicit NgramKey(std::vector<std::string> it);
  // Parses space-separated items.
  static NgramKey Parse(std::string_view text);

  std::string ToString() const;
  bool operator==(const NgramKey &) const = default;
  bool operator<(const NgramKey &other) const { return items < other.items; }
};

// Coarse class used for key suffixes: NOUN, ADJ, VERB, NUM, DT, or "of" for
// the literal preposition. Returns "" for tags outside those classes.
std::string CoarseTag(std::string_view ptb_tag, std::string_view surface);

// "reinforced" + "JJ" -> "reinforced_ADJ"; the preposition "of" stays bare.
std::string KeyItem(std::string_view surface, std::string_view ptb_tag);

// Suffix after the last '_' of an item ("of" for the bare preposition).
std::string ItemClass(std::string_view item);

enum class VaryingSlot { kHead, kTail };

class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(uint64_t total_documents)
      : total_documents_(total_documents) {}

  // Counts must be >= 1. Re-adding a key replaces its count.
  void Add(const NgramKey &key, uint64_t count);

  std::optional<uint64_t> Find(const NgramKey &key) const;
  uint64_t total_documents() const { return total_documents_; }
  size_t size() const { return entries_.size(); }

  // Keys sharing every item with `key` except the varying slot, whose item
  // must be in the same coarse class. Includes `key` itself when stored.
  std::vector<std::pair<NgramKey, uint64_t>> Family(const NgramKey &key,
                                                    VaryingSlot slot) const;

 private:
  std::string FamilyIndexKey(const NgramKey &key, VaryingSlot slot) const;

  uint64_t total_documents_ = 1;
  std::vector<std::pair<NgramKey, uint64_t>> entries_;
  std::unordered_map<std::string, size_t> by_key_;
  std::unordered_map<std::string, std::vector<size_t>> head_families_;
  std::unordered_map<std::string, std::vector<size_t>> tail_families_;
};

// Format: optional "#total_documents <n>" header, then one
// "item1 item2 [item3 [item4]]<TAB>count" row per n-gram.
FrequencyTable ParseFrequencyTable(std::string_view content);
FrequencyTable LoadFrequencyTable(const std::string &path);

struct CurvePoint {
  NgramKey key;
  uint64_t count = 0;
  // Min-max normalized onto [0, N-1].
  double frequency = 0.0;
};

struct NeighborCurve {
  std::vector<CurvePoint> points;
  size_t focus_index = 0;
  VaryingSlot varying_slot = VaryingSlot::kHead;

  size_t size() const { return points.size(); }
};

// Family of `key` sorted by (count, key) ascending and normalized per curve.
// Throws DistinctivenessUnavailable when `key` is not in the table.
NeighborCurve BuildNeighborCurve(const FrequencyTable &table, const NgramKey &key,
                                 VaryingSlot slot);

// Applies min-max normalization onto [0, N-1] to raw counts.
std::vector<double> NormalizeCounts(const std::vector<uint64_t> &counts);

inline constexpr int kDefaultGridStep = 50;

// Central-difference step at `index`: min(grid, index, N-1-index).
size_t GridStep(size_t curve_length, size_t index, int grid = kDefaultGridStep);

// Angle in degrees of the slope of the normalized curve at `index`, using a
// central difference with step GridStep(); at the curve ends a one-sided
// unit-step difference is used instead. A one-point curve yields 0.
double TangentialAngle(const NeighborCurve &curve, size_t index,
                       int grid = kDefaultGridStep);
double TangentialAngle(const std::vector<double> &frequencies, size_t index,
                       int grid = kDefaultGridStep);

inline constexpr double kDefaultAlphaMin1 = 60.0;
inline constexpr double kDefaultAlphaMin2 = 0.0;

// max(a1, a2) >= min1 and min(a1, a2) >= min2.
bool IsDistinctive(double alpha1, double alpha2, double alpha_min1 = kDefaultAlphaMin1,
                   double alpha_min2 = kDefaultAlphaMin2);

// Variant with possibly missing directions. A missing angle fails alpha_min1;
// it passes alpha_min2 only if alpha_min2 <= 0 and the other angle exists.
bool IsDistinctive(std::optional<double> alpha1, std::optional<double> alpha2,
                   double alpha_min1, double alpha_min2);

}  // namespace conex

#endif  // CONEX_NGRAM_H_
