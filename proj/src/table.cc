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

#include "pcg/table.h"

#include <fstream>

#include "json.hpp"
#include "pcg/errors.h"

namespace pcg {

namespace {

constexpr std::string_view kPunctuation = ",.;:()-\"";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Appends the UTF-8 encoding of `cp`.
void append_utf8(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    // Latin Extended-A pairs upper/lower case on even/odd code points,
    // except the 0x139-0x148 and 0x179-0x17E runs which start odd.
    const bool odd_run =
        (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if (odd_run) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x130 || cp == 0x131 || cp == 0x138 || cp == 0x149 ||
        cp == 0x17F) {
      return cp;
    }
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  return cp;
}

// Decodes one code point at text[i], advancing i. Invalid bytes pass
// through unchanged as single units.
char32_t next_code_point(std::string_view text, std::size_t &i,
                         std::size_t &length) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  auto cont = [&](std::size_t k) {
    return i + k < text.size() &&
           (static_cast<unsigned char>(text[i + k]) & 0xC0) == 0x80;
  };
  auto byte = [&](std::size_t k) {
    return static_cast<char32_t>(static_cast<unsigned char>(text[i + k]) & 0x3F);
  };
  if (b0 < 0x80) {
    length = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    length = 2;
    return (static_cast<char32_t>(b0 & 0x1F) << 6) | byte(1);
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    length = 3;
    return (static_cast<char32_t>(b0 & 0x0F) << 12) | (byte(1) << 6) | byte(2);
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    length = 4;
    return (static_cast<char32_t>(b0 & 0x07) << 18) | (byte(1) << 12) |
           (byte(2) << 6) | byte(3);
  }
  length = 1;
  return 0xFFFFFFFF;  // marker: copy the raw byte
}

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    std::size_t length = 1;
    const char32_t cp = next_code_point(text, i, length);
    if (cp == 0xFFFFFFFF) {
      out.push_back(text[i]);
    } else {
      append_utf8(out, fold_case(cp));
    }
    i += length;
  }
  return out;
}

Tokens parse_field_tokens(const nlohmann::json &value, const char *what,
                          int line) {
  if (!value.is_string()) {
    throw IngestionError(std::string(what) + " must be a string", line);
  }
  return tokenize(value.get<std::string>());
}

}  // namespace

bool is_punctuation(std::string_view token) {
  return token.size() == 1 && kPunctuation.find(token[0]) != std::string_view::npos;
}

Tokens tokenize(std::string_view text) {
  const std::string lowered = lowercase(text);
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char c : lowered) {
    if (is_space(c)) {
      flush();
    } else if (kPunctuation.find(c) != std::string_view::npos) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::string detokenize(const Tokens &tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Tokens linearize(const Table &table) {
  Tokens out;
  for (const Slot &slot : table.slots) {
    out.insert(out.end(), slot.key.begin(), slot.key.end());
    out.emplace_back("is");
    out.insert(out.end(), slot.value.begin(), slot.value.end());
    out.emplace_back(";");
  }
  return out;
}

Record parse_record(std::string_view line, int line_number, bool require_summary) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error &e) {
    throw IngestionError(std::string("malformed JSON: ") + e.what(),
                         line_number);
  }
  if (!doc.is_object()) throw IngestionError("record must be an object", line_number);
  if (!doc.contains("table")) throw IngestionError("missing field \"table\"", line_number);
  if (require_summary && !doc.contains("summary")) {
    throw IngestionError("missing field \"summary\"", line_number);
  }
  const auto &table = doc["table"];
  if (!table.is_array()) throw IngestionError("\"table\" must be an array", line_number);
  if (table.empty()) throw IngestionError("empty table", line_number);

  Record record;
  for (const auto &pair : table) {
    if (!pair.is_array() || pair.size() != 2) {
      throw IngestionError("table entries must be [key, value] pairs", line_number);
    }
    Slot slot;
    slot.key = parse_field_tokens(pair[0], "slot key", line_number);
    slot.value = parse_field_tokens(pair[1], "slot value", line_number);
    if (slot.key.empty()) throw IngestionError("empty slot key", line_number);
    record.table.slots.push_back(std::move(slot));
  }
  if (doc.contains("summary")) {
    record.summary = parse_field_tokens(doc["summary"], "summary", line_number);
  }
  if (doc.contains("source_id")) {
    const auto &id = doc["source_id"];
    record.table.source_id = id.is_string() ? id.get<std::string>() : id.dump();
  } else {
    record.table.source_id = "line-" + std::to_string(line_number);
  }
  return record;
}

std::vector<std::string> read_lines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      lines.emplace_back();
      continue;
    }
    lines.push_back(line);
  }
  return lines;
}

std::vector<Record> read_records(const std::string &path, bool require_summary) {
  const auto lines = read_lines(path);
  std::vector<Record> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    records.push_back(parse_record(lines[i], static_cast<int>(i + 1), require_summary));
  }
  return records;
}

}  // namespace pcg
