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

#include "doctest.h"
#include "pcg/alignment.h"
#include "pcg/errors.h"
#include "pcg/random.h"
#include "support/fixtures.h"

using namespace pcg;
using pcg::testing::make_table;

TEST_CASE("fuzzy_match tiers") {
  const AliasTable aliases = pcg::testing::shipped_aliases();
  const Tokens summary = tokenize("edinho júnior ( born 7 march 1994 ) is a brazilian footballer");

  CHECK(fuzzy_match(Slot{{"name"}, tokenize("edinho júnior")}, summary, aliases) == 0u);
  CHECK_FALSE(fuzzy_match(Slot{{"club"}, tokenize("vitória")}, summary, aliases).has_value());
  CHECK(fuzzy_match(Slot{{"nationality"}, {"brazil"}}, summary, aliases) == 10u);
  // Without the alias table the adjective form is not recognized.
  CHECK_FALSE(fuzzy_match(Slot{{"nationality"}, {"brazil"}}, summary, AliasTable{}).has_value());
  // Comma-free realization of "7 march, 1994" falls to the overlap tier.
  CHECK(fuzzy_match(Slot{{"birth_date"}, tokenize("7 march, 1994")}, summary, aliases) == 4u);
  // Half of the content tokens is enough; punctuation does not count.
  CHECK(fuzzy_match(Slot{{"birth_place"}, tokenize("salvador, brazil")},
                    tokenize("born in salvador"), aliases) == 2u);
  CHECK_FALSE(fuzzy_match(Slot{{"x"}, tokenize("one two three")}, tokenize("three"), aliases)
                  .has_value());
  CHECK_FALSE(fuzzy_match(Slot{{"caption"}, {}}, summary, aliases).has_value());
  CHECK_FALSE(fuzzy_match(Slot{{"height"}, tokenize("1.73 m")}, tokenize("a . b"), aliases)
                  .has_value());
}

TEST_CASE("exact tier returns the earliest contiguous occurrence") {
  // Brute-force scan oracle over random token strings.
  Rng rng(8);
  const Tokens alphabet = {"a", "b", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    Tokens summary(rng.below(12));
    for (auto &t : summary) t = alphabet[rng.below(3)];
    Tokens value(1 + rng.below(3));
    for (auto &t : value) t = alphabet[rng.below(3)];
    std::optional<std::size_t> expected;
    for (std::size_t i = 0; i + value.size() <= summary.size() && !expected; ++i) {
      bool all = true;
      for (std::size_t j = 0; j < value.size(); ++j) all = all && summary[i + j] == value[j];
      if (all) expected = i;
    }
    if (expected) {
      CHECK(fuzzy_match(Slot{{"k"}, value}, summary, AliasTable{}) == expected);
    }
  }
}

TEST_CASE("extract_plan_labels") {
  const AliasTable aliases = pcg::testing::shipped_aliases();
  SUBCASE("book example") {
    PlanLabels y = extract_plan_labels(pcg::testing::book_fixture_table(),
                                       pcg::testing::book_fixture_summary(), aliases);
    CHECK(labels_to_string(y) == "1,3,2,∅,4");
  }
  SUBCASE("summary without slot values") {
    PlanLabels y = extract_plan_labels(pcg::testing::book_fixture_table(),
                                       tokenize("nothing relevant here"), aliases);
    CHECK(labels_to_string(y) == "∅,∅,∅,∅,∅");
  }
  SUBCASE("ties keep table order") {
    Table t = make_table({{"birth_place", "washington"}, {"high_school", "washington"}});
    CHECK(labels_to_string(extract_plan_labels(t, tokenize("born in washington"), aliases)) ==
          "1,2");
  }
  SUBCASE("ranks beyond the cap become empty") {
    std::vector<std::pair<std::string, std::string>> slots;
    std::string summary;
    for (int i = 0; i < 18; ++i) {
      slots.emplace_back("k" + std::to_string(i), "w" + std::to_string(i));
      summary += "w" + std::to_string(i) + " ";
    }
    PlanLabels y = extract_plan_labels(make_table(slots), tokenize(summary), aliases);
    CHECK(y.labels[15] == 16);
    CHECK(y.labels[16] == kNoLabel);
    CHECK(y.labels[17] == kNoLabel);
  }
  SUBCASE("gold labels form a permutation prefix") {
    Rng rng(12);
    const Tokens words = {"p", "q", "r", "s", "t", "u"};
    for (int trial = 0; trial < 100; ++trial) {
      Table t;
      for (int i = 0; i < 5; ++i) {
        t.slots.push_back(Slot{{"k"}, {words[rng.below(words.size())]}});
      }
      Tokens summary(rng.below(8));
      for (auto &w : summary) w = words[rng.below(words.size())];
      PlanLabels y = extract_plan_labels(t, summary, aliases);
      std::vector<int> ranks;
      for (int l : y.labels) {
        if (l != kNoLabel) ranks.push_back(l);
      }
      std::sort(ranks.begin(), ranks.end());
      for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == static_cast<int>(i) + 1);
    }
  }
}

TEST_CASE("alias table parsing") {
  AliasTable t = AliasTable::from_json(R"({"United States": ["American"]})");
  CHECK(t.size() == 1);
  REQUIRE(t.find(tokenize("united states")) != nullptr);
  CHECK(t.find(tokenize("united states"))->front() == Tokens{"american"});
  CHECK_THROWS_AS(AliasTable::from_json(R"({"x": "y"})"), IngestionError);
  CHECK_THROWS_AS(AliasTable::from_json("[1]"), IngestionError);
  CHECK_THROWS_AS(AliasTable::load("/nonexistent/aliases.json"), IngestionError);
}
