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

#ifndef PCG_OPTIMIZER_H_
#define PCG_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcg/parameters.h"

namespace pcg {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// First/second moment estimates for one parameter tensor.
struct MomentState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
};

// One decoupled-weight-decay Adam update:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
// with bias-corrected m_hat, v_hat. Throws TrainingError naming the
// parameter when the gradient is not finite.
void adamw_update(std::span<double> param, std::span<const double> grad,
                  MomentState &state, const AdamWConfig &config,
                  std::string_view name);

class AdamW {
 public:
  explicit AdamW(AdamWConfig config) : config_(config) {}

  // Updates every parameter from its accumulated gradient. Parameters with
  // no gradient are treated as having a zero gradient.
  void step(ParameterList &params);

  const AdamWConfig &config() const { return config_; }

 private:
  AdamWConfig config_;
  std::unordered_map<std::string, MomentState> state_;
};

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParameterList &params, double max_norm);

// Multiplies every accumulated gradient by `factor`.
void scale_grads(ParameterList &params, double factor);

}  // namespace pcg

#endif  // PCG_OPTIMIZER_H_
