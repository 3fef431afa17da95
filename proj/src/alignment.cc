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

#include "pcg/alignment.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pcg/errors.h"

namespace pcg {

AliasTable AliasTable::from_json(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw IngestionError(std::string("alias table: ") + e.what());
  }
  if (!doc.is_object()) throw IngestionError("alias table must be a JSON object");
  AliasTable table;
  for (const auto &[value, aliases] : doc.items()) {
    if (!aliases.is_array()) {
      throw IngestionError("alias table entry \"" + value + "\" must be an array");
    }
    for (const auto &alias : aliases) {
      if (!alias.is_string()) {
        throw IngestionError("alias table entry \"" + value + "\" has a non-string alias");
      }
      table.add(value, alias.get<std::string>());
    }
  }
  return table;
}

AliasTable AliasTable::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open alias table " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void AliasTable::add(const std::string &value, const std::string &alias) {
  Tokens alias_tokens = tokenize(alias);
  if (alias_tokens.empty()) return;
  entries_[detokenize(tokenize(value))].push_back(std::move(alias_tokens));
}

const std::vector<Tokens> *AliasTable::find(const Tokens &value) const {
  auto it = entries_.find(detokenize(value));
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::size_t> find_subsequence(std::span<const std::string> haystack,
                                            std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end());
  if (it == haystack.end()) return std::nullopt;
  return static_cast<std::size_t>(it - haystack.begin());
}

std::optional<std::size_t> fuzzy_match(const Slot &slot,
                                       std::span<const std::string> summary,
                                       const AliasTable &aliases) {
  if (slot.value.empty()) return std::nullopt;

  if (auto exact = find_subsequence(summary, slot.value)) return exact;

  if (const auto *variants = aliases.find(slot.value)) {
    std::optional<std::size_t> best;
    for (const auto &variant : *variants) {
      if (auto pos = find_subsequence(summary, variant)) {
        if (!best || *pos < *best) best = pos;
      }
    }
    if (best) return best;
  }

  std::set<std::string_view> present(summary.begin(), summary.end());
  std::set<std::string_view> shared;
  std::size_t content = 0, hits = 0;
  for (const auto &token : slot.value) {
    if (is_punctuation(token)) continue;
    ++content;
    if (present.contains(token)) {
      ++hits;
      shared.insert(token);
    }
  }
  if (content == 0 || 2 * hits < content) return std::nullopt;
  for (std::size_t i = 0; i < summary.size(); ++i) {
    if (shared.contains(summary[i])) return i;
  }
  return std::nullopt;
}

PlanLabels extract_plan_labels(const Table &table,
                               std::span<const std::string> summary,
                               const AliasTable &aliases, int max_rank) {
  std::vector<std::pair<std::size_t, std::size_t>> matched;  // (pos, slot)
  for (std::size_t i = 0; i < table.slots.size(); ++i) {
    if (auto pos = fuzzy_match(table.slots[i], summary, aliases)) {
      matched.emplace_back(*pos, i);
    }
  }
  std::sort(matched.begin(), matched.end());
  PlanLabels out;
  out.labels.assign(table.slots.size(), kNoLabel);
  for (std::size_t rank = 0; rank < matched.size(); ++rank) {
    if (static_cast<int>(rank) >= max_rank) break;
    out.labels[matched[rank].second] = static_cast<int>(rank) + 1;
  }
  return out;
}

std::string labels_to_string(const PlanLabels &labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (i) out += ',';
    out += labels.labels[i] == kNoLabel ? "∅" : std::to_string(labels.labels[i]);
  }
  return out;
}

}  // namespace pcg
