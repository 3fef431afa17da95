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

#ifndef PCG_CRF_H_
#define PCG_CRF_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pcg/tensor.h"

namespace pcg {

// Linear-chain CRF over K labels. Emissions are [n x K]. Transitions are
// [(K+2) x (K+2)] where row/column K is START and K+1 is STOP. Entries that
// would move into START or out of STOP are never read, which is the same as
// holding them at -inf.
struct CrfShape {
  std::size_t num_labels;
  std::size_t start() const { return num_labels; }
  std::size_t stop() const { return num_labels + 1; }
  std::size_t num_states() const { return num_labels + 2; }
};

CrfShape crf_shape_of(const Tensor &transitions);

// Total path score of `labels` including START->l_1 and l_n->STOP.
Tensor crf_path_score(const Tensor &emissions, const Tensor &transitions,
                      std::span<const int> labels);

// log of the sum over all K^n label sequences of exp(path score).
Tensor crf_forward(const Tensor &emissions, const Tensor &transitions);

// Highest scoring sequence. Ties go to the lower label index.
std::vector<int> crf_viterbi(const Tensor &emissions, const Tensor &transitions);

}  // namespace pcg

#endif  // PCG_CRF_H_
