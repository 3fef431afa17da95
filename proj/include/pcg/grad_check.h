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

#ifndef PCG_GRAD_CHECK_H_
#define PCG_GRAD_CHECK_H_

#include <functional>
#include <vector>

#include "pcg/tensor.h"

namespace pcg {

// Compares reverse-mode gradients of a scalar function against central
// differences (f(p + eps) - f(p - eps)) / 2 eps, elementwise over `params`.
// Returns max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
//
// `f` must rebuild its forward computation from `params` on every call.
// Parameters that do not require grad contribute an analytic gradient of
// zero; leave frozen parameters out of `params` to exclude them.
// Throws ContractError when two evaluations at the same point differ.
double grad_check(const std::function<Tensor()> &f, std::vector<Tensor> params,
                  double eps = 1e-5);

}  // namespace pcg

#endif  // PCG_GRAD_CHECK_H_
