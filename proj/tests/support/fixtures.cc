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

#include "support/fixtures.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace pcg::testing {

Tensor random_tensor(const Shape &shape, Rng &rng, double scale,
                     bool requires_grad) {
  std::vector<double> values(shape_size(shape));
  for (auto &v : values) v = rng.uniform(-scale, scale);
  return Tensor::from(shape, std::move(values), requires_grad);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

Table make_table(const std::vector<std::pair<std::string, std::string>> &slots,
                 const std::string &source_id) {
  Table table;
  table.source_id = source_id;
  for (const auto &[key, value] : slots) {
    table.slots.push_back(Slot{tokenize(key), tokenize(value)});
  }
  return table;
}

Table book_fixture_table() {
  return make_table({{"name", "a push and a shove"},
                     {"author", "christopher kelly"},
                     {"country", "australia"},
                     {"language", "english"},
                     {"published", "2007"}},
                    "book");
}

std::vector<std::string> book_fixture_summary() {
  return tokenize(
      "a push and a shove is an australian novel by christopher kelly , "
      "published in 2007 .");
}

Table footballer_fixture_table() {
  return make_table({{"name", "edinho júnior"},
                     {"fullname", "edon júnior viegas amaral"},
                     {"birth_date", "7 march, 1994"},
                     {"birth_place", "salvador, brazil"},
                     {"height", "1.73 m"},
                     {"position", "forward"},
                     {"currentclub", "vitória"},
                     {"clubnumber", "11"}},
                    "footballer");
}

std::vector<std::string> footballer_fixture_summary() {
  return tokenize(
      "edon júnior viegas amaral , commonly known as edinho júnior ( born 7 "
      "march 1994 in salvador ) , is a brazilian footballer who plays as a "
      "forward for vitória .");
}

AliasTable shipped_aliases() {
  return AliasTable::load(std::string(PCG_DATA_DIR) + "/aliases.json");
}

std::string scratch_dir(const std::string &name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("pcg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace pcg::testing
