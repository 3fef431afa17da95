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

#include "pcg/optimizer.h"

#include <cmath>

#include "pcg/errors.h"

namespace pcg {

void adamw_update(std::span<double> param, std::span<const double> grad,
                  MomentState &state, const AdamWConfig &config,
                  std::string_view name) {
  if (param.size() != grad.size()) {
    throw ContractError("adamw_update: gradient size mismatch for " +
                        std::string(name));
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw TrainingError("non-finite gradient for parameter " + std::string(name));
    }
  }
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    param[i] -= config.lr *
                (m_hat / (std::sqrt(v_hat) + config.eps) + config.weight_decay * param[i]);
  }
}

void AdamW::step(ParameterList &params) {
  for (auto &p : params) {
    const std::vector<double> grad = p.tensor.grad();
    adamw_update(p.tensor.mutable_data(), grad, state_[p.name], config_, p.name);
  }
}

double clip_grad_norm(ParameterList &params, double max_norm) {
  double total = 0.0;
  for (const auto &p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) total += g * g;
  }
  const double norm = std::sqrt(total);
  if (norm > max_norm && norm > 0.0) scale_grads(params, max_norm / norm);
  return norm;
}

void scale_grads(ParameterList &params, double factor) {
  for (auto &p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double &g : p.tensor.mutable_grad()) g *= factor;
  }
}

}  // namespace pcg
