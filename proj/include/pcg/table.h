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

#ifndef PCG_TABLE_H_
#define PCG_TABLE_H_

// Tables of key-value slots, word-level tokenization, template
// linearization and JSONL ingestion.

#include <string>
#include <string_view>
#include <vector>

namespace pcg {

using Tokens = std::vector<std::string>;

struct Slot {
  Tokens key;    // never empty
  Tokens value;  // may be empty; such slots are kept in place

  bool has_empty_value() const { return value.empty(); }
};

struct Table {
  std::vector<Slot> slots;
  std::string source_id;
};

// One dataset line: a table and its reference summary.
struct Record {
  Table table;
  Tokens summary;
};

// Lowercases (ASCII and Latin-1/Latin Extended-A letters), splits on
// whitespace and splits off each of , . ; : ( ) - " as its own token.
Tokens tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string detokenize(const Tokens &tokens);

bool is_punctuation(std::string_view token);

// "key is value ;" for every slot, in table order.
Tokens linearize(const Table &table);

// Parses {"table": [[key, value], ...], "summary": "...", "source_id": "..."}.
// source_id is optional and defaults to "line-<n>". Without
// `require_summary` a missing summary is read as empty. Throws
// IngestionError.
Record parse_record(std::string_view line, int line_number = 0, bool require_summary = true);

// Reads a JSONL file; blank lines are skipped. Throws IngestionError.
std::vector<Record> read_records(const std::string &path, bool require_summary = true);

// Lines of a JSONL file. Blank lines come back as empty strings so that
// index + 1 is the line number.
std::vector<std::string> read_lines(const std::string &path);

}  // namespace pcg

#endif  // PCG_TABLE_H_
