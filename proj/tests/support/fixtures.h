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

#ifndef PCG_TESTS_SUPPORT_FIXTURES_H_
#define PCG_TESTS_SUPPORT_FIXTURES_H_

#include <string>
#include <vector>

#include "pcg/random.h"
#include "pcg/alignment.h"
#include "pcg/table.h"
#include "pcg/tensor.h"

namespace pcg::testing {

Tensor random_tensor(const Shape &shape, Rng &rng, double scale = 1.0,
                     bool requires_grad = true);

// Max absolute elementwise difference.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// Tables built from (key, value) string pairs.
Table make_table(const std::vector<std::pair<std::string, std::string>> &slots,
                 const std::string &source_id = "fixture");

// The book example: Name, Author, Country, Language, Published.
Table book_fixture_table();
std::vector<std::string> book_fixture_summary();

// The footballer example.
Table footballer_fixture_table();
std::vector<std::string> footballer_fixture_summary();

// Alias table shipped under data/.
AliasTable shipped_aliases();

// Fresh scratch directory under the system temp dir.
std::string scratch_dir(const std::string &name);

}  // namespace pcg::testing

#endif  // PCG_TESTS_SUPPORT_FIXTURES_H_
