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


#ifndef PCG_TESTS_SUPPORT_SYNTHETIC_CORPUS_H_
#define PCG_TESTS_SUPPORT_SYNTHETIC_CORPUS_H_

// Generated table/summary corpora with known content plans.

#include <cstdint>
#include <string>
#include <vector>

#include "pcg/table.h"

namespace pcg::testing {

// Biography records. Summaries mention every present main slot in this
// priority order: name, birth_date, birth_place, nationality, occupation,
// club. Nationality is written as its adjective. Tables also carry
// distractor slots (height, weight, caption) and an occasional empty
// website slot. Slots follow a fixed infobox order that differs from the
// mention order.
std::vector<Record> synthetic_humans(std::size_t n, uint64_t seed);
const std::vector<std::string> &human_key_priority();

// Same value pools with a different sentence layout, for pretraining.
std::vector<Record> synthetic_people(std::size_t n, uint64_t seed);

// Book records: title, author, country, genre, language, published,
// publisher, plus distractors.
std::vector<Record> synthetic_books(std::size_t n, uint64_t seed);

// Writes records in the dataset JSONL format.
void write_jsonl(const std::string &path, const std::vector<Record> &records);

}  // namespace pcg::testing

#endif  // PCG_TESTS_SUPPORT_SYNTHETIC_CORPUS_H_
