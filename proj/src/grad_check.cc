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

#include "pcg/grad_check.h"

#include <algorithm>
#include <cmath>

#include "pcg/errors.h"

namespace pcg {

namespace {

double evaluate(const std::function<Tensor()> &f) {
  Tape::Pause pause;
  const Tensor out = f();
  if (out.size() != 1) throw ContractError("grad_check: f must return a scalar");
  return out.item();
}

}  // namespace

double grad_check(const std::function<Tensor()> &f, std::vector<Tensor> params,
                  double eps) {
  const double first = evaluate(f);
  const double second = evaluate(f);
  if (first != second) {
    throw ContractError("grad_check: f is not deterministic");
  }

  for (auto &p : params) p.zero_grad();
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    tape.backward(f());
    for (const auto &p : params) analytic.push_back(p.grad());
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(f);
      values[i] = saved - eps;
      const double down = evaluate(f);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace pcg
