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

#ifndef PCG_PARAMETERS_H_
#define PCG_PARAMETERS_H_

#include <string>
#include <vector>

#include "pcg/tensor.h"

namespace pcg {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<NamedParameter>;

inline void zero_grads(ParameterList &params) {
  for (auto &p : params) p.tensor.zero_grad();
}

inline std::size_t parameter_count(const ParameterList &params) {
  std::size_t n = 0;
  for (const auto &p : params) n += p.tensor.size();
  return n;
}

}  // namespace pcg

#endif  // PCG_PARAMETERS_H_
