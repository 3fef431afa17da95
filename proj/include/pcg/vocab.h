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

#ifndef PCG_VOCAB_H_
#define PCG_VOCAB_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcg/table.h"

namespace pcg {

// Word vocabulary. Ids 0..4 are reserved for PAD, BOS, EOS, UNK and SEP.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kUnk = 3;
  static constexpr std::size_t kSep = 4;
  static constexpr std::size_t kNumReserved = 5;

  // Reserved tokens only.
  Vocab();

  // Every linearized-table and summary token occurring at least `min_freq` times,
  // ordered by (frequency desc, token asc). Throws IngestionError on an
  // empty corpus.
  static Vocab build(const std::vector<Record> &corpus, std::size_t min_freq = 1);

  // Rebuilds a vocabulary from its id-ordered token list (as stored in
  // checkpoints). Throws ContractError if the reserved prefix is wrong or a
  // token repeats.
  static Vocab from_tokens(std::vector<std::string> tokens);

  // Copy with every token of `extra` not already present appended in order.
  Vocab extended(const Tokens &extra) const;

  std::size_t size() const { return tokens_.size(); }
  std::optional<std::size_t> find(std::string_view token) const;
  // Falls back to kUnk.
  std::size_t id(std::string_view token) const;
  const std::string &token(std::size_t id) const;
  const std::vector<std::string> &tokens() const { return tokens_; }

  std::vector<std::size_t> encode(const Tokens &tokens) const;
  Tokens decode(const std::vector<std::size_t> &ids) const;

  bool operator==(const Vocab &other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace pcg

#endif  // PCG_VOCAB_H_
