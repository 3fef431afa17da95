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

#include "pcg/vocab.h"

#include <algorithm>
#include <map>

#include "pcg/errors.h"

namespace pcg {

namespace {

const char *const kReserved[Vocab::kNumReserved] = {"<pad>", "<bos>", "<eos>",
                                                     "<unk>", "<sep>"};

}  // namespace

Vocab::Vocab() {
  for (const char *token : kReserved) add(token);
}

void Vocab::add(std::string token) {
  if (index_.contains(token)) {
    throw ContractError("duplicate vocabulary token \"" + token + "\"");
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(const std::vector<Record> &corpus, std::size_t min_freq) {
  if (corpus.empty()) throw IngestionError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  auto count = [&](const Tokens &tokens) {
    for (const auto &t : tokens) ++counts[t];
  };
  // Tables are counted in linearized form, so the template words "is" and
  // ";" are ordinary entries.
  for (const auto &record : corpus) {
    count(linearize(record.table));
    count(record.summary);
  }

  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto &[token, n] : counts) {
    if (n >= min_freq) entries.emplace_back(token, n);
  }
  std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab vocab;
  for (auto &[token, n] : entries) {
    if (!vocab.index_.contains(token)) vocab.add(token);
  }
  return vocab;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kNumReserved) {
    throw ContractError("vocabulary is missing reserved tokens");
  }
  for (std::size_t i = 0; i < kNumReserved; ++i) {
    if (tokens[i] != kReserved[i]) {
      throw ContractError("vocabulary reserved id " + std::to_string(i) +
                          " must be " + kReserved[i]);
    }
  }
  Vocab vocab;
  for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
    vocab.add(std::move(tokens[i]));
  }
  return vocab;
}

std::optional<std::size_t> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocab::id(std::string_view token) const {
  return find(token).value_or(kUnk);
}

const std::string &Vocab::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " >= vocabulary size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<std::size_t> Vocab::encode(const Tokens &tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto &t : tokens) ids.push_back(id(t));
  return ids;
}

Tokens Vocab::decode(const std::vector<std::size_t> &ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(token(id));
  return out;
}

Vocab Vocab::extended(const Tokens &extra) const {
  Vocab out = *this;
  for (const auto &tok : extra) {
    if (!out.find(tok)) out.add(tok);
  }
  return out;
}

}  // namespace pcg
