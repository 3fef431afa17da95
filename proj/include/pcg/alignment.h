// Copyright 2026 The PCG Authors.
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

#ifndef PCG_ALIGNMENT_H_
#define PCG_ALIGNMENT_H_

// Locating slot values inside a summary and deriving gold content-plan
// labels from those positions.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcg/table.h"

namespace pcg {

// Surface variants of slot values, e.g. "brazil" -> "brazilian". Keys and
// variants are stored tokenized; lookups use the whole value.
class AliasTable {
 public:
  AliasTable() = default;

  // JSON object mapping value text to an array of alias strings.
  static AliasTable from_json(const std::string &text);
  static AliasTable load(const std::string &path);

  void add(const std::string &value, const std::string &alias);
  const std::vector<Tokens> *find(const Tokens &value) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<Tokens>> entries_;
};

// Earliest summary position where the slot's value is judged present.
// Tiers, first hit wins:
//   1. the value tokens occur contiguously;
//   2. an alias of the whole value occurs contiguously;
//   3. at least half of the value's non-punctuation tokens occur somewhere,
//      reporting the earliest position of any shared token.
// Slots with empty values never match.
std::optional<std::size_t> fuzzy_match(const Slot &slot,
                                       std::span<const std::string> summary,
                                       const AliasTable &aliases);

// Earliest start of `needle` as a contiguous run in `haystack`.
std::optional<std::size_t> find_subsequence(std::span<const std::string> haystack,
                                            std::span<const std::string> needle);

inline constexpr int kNoLabel = 0;  // the "not in summary" label
inline constexpr int kDefaultMaxRank = 16;

// One label per slot: kNoLabel or a rank in 1..max_rank.
struct PlanLabels {
  std::vector<int> labels;

  bool operator==(const PlanLabels &) const = default;
};

// Matched slots ranked by ascending summary position (ties by table order)
// receive 1..k; unmatched slots and ranks above max_rank get kNoLabel.
PlanLabels extract_plan_labels(const Table &table,
                               std::span<const std::string> summary,
                               const AliasTable &aliases,
                               int max_rank = kDefaultMaxRank);

// "1,3,2,∅,4"
std::string labels_to_string(const PlanLabels &labels);

}  // namespace pcg

#endif  // PCG_ALIGNMENT_H_
