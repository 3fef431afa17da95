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

#include "pcg/crf.h"

#include <string>

#include "pcg/errors.h"

namespace pcg {
namespace {

void check_inputs(const Tensor &emissions, const CrfShape &crf) {
  if (emissions.rank() != 2 || emissions.dim(1) != crf.num_labels) {
    throw DimensionError("crf: emissions " + shape_string(emissions.shape()) +
                         " do not match " + std::to_string(crf.num_labels) +
                         " labels");
  }
  if (emissions.dim(0) == 0) throw ContractError("crf: empty sequence");
}

// Row `row` of a 2-D tensor restricted to its first `count` columns, as [count].
Tensor row_prefix(const Tensor &m, std::size_t row, std::size_t count) {
  return reshape(slice(slice(m, 0, row, row + 1), 1, 0, count), {count});
}

}  // namespace

CrfShape crf_shape_of(const Tensor &transitions) {
  if (transitions.rank() != 2 || transitions.dim(0) != transitions.dim(1) ||
      transitions.dim(0) < 3) {
    throw DimensionError("crf: transitions must be square with at least 3 states, got " +
                         shape_string(transitions.shape()));
  }
  return CrfShape{transitions.dim(0) - 2};
}

Tensor crf_path_score(const Tensor &emissions, const Tensor &transitions,
                      std::span<const int> labels) {
  const CrfShape crf = crf_shape_of(transitions);
  check_inputs(emissions, crf);
  const std::size_t n = emissions.dim(0);
  if (labels.size() != n) {
    throw ContractError("crf: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(n) + " positions");
  }
  const std::size_t k = crf.num_labels;
  const std::size_t states = crf.num_states();
  std::vector<std::size_t> emit_idx;
  std::vector<std::size_t> trans_idx;
  std::size_t prev = crf.start();
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw ContractError("crf: label " + std::to_string(labels[i]) +
                          " out of range [0, " + std::to_string(k) + ")");
    }
    const auto label = static_cast<std::size_t>(labels[i]);
    emit_idx.push_back(i * k + label);
    trans_idx.push_back(prev * states + label);
    prev = label;
  }
  trans_idx.push_back(prev * states + crf.stop());
  return sum(take(emissions, emit_idx)) + sum(take(transitions, trans_idx));
}

Tensor crf_forward(const Tensor &emissions, const Tensor &transitions) {
  const CrfShape crf = crf_shape_of(transitions);
  check_inputs(emissions, crf);
  const std::size_t n = emissions.dim(0);
  const std::size_t k = crf.num_labels;
  const Tensor inner = slice(slice(transitions, 0, 0, k), 1, 0, k);
  // inner_t[j, i] = M[i, j] so that adding alpha broadcasts over the source.
  const Tensor inner_t = transpose(inner);
  const Tensor from_start = row_prefix(transitions, crf.start(), k);
  const Tensor to_stop =
      reshape(slice(slice(transitions, 0, 0, k), 1, crf.stop(), crf.stop() + 1), {k});

  Tensor alpha = from_start + row_prefix(emissions, 0, k);
  for (std::size_t t = 1; t < n; ++t) {
    alpha = logsumexp(inner_t + alpha, 1) + row_prefix(emissions, t, k);
  }
  return logsumexp(reshape(alpha + to_stop, {1, k}), 1);
}

std::vector<int> crf_viterbi(const Tensor &emissions, const Tensor &transitions) {
  const CrfShape crf = crf_shape_of(transitions);
  check_inputs(emissions, crf);
  const std::size_t n = emissions.dim(0);
  const std::size_t k = crf.num_labels;
  const auto e = emissions.data();
  const auto m = transitions.data();
  const std::size_t states = crf.num_states();
  auto trans = [&](std::size_t from, std::size_t to) { return m[from * states + to]; };

  std::vector<double> score(k);
  for (std::size_t j = 0; j < k; ++j) score[j] = trans(crf.start(), j) + e[j];
  std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(k, 0));
  for (std::size_t t = 1; t < n; ++t) {
    std::vector<double> next(k);
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t best = 0;
      double best_score = score[0] + trans(0, j);
      for (std::size_t i = 1; i < k; ++i) {
        const double s = score[i] + trans(i, j);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      next[j] = best_score + e[t * k + j];
      back[t][j] = best;
    }
    score = std::move(next);
  }
  std::size_t last = 0;
  double best_final = score[0] + trans(0, crf.stop());
  for (std::size_t j = 1; j < k; ++j) {
    const double s = score[j] + trans(j, crf.stop());
    if (s > best_final) {
      best_final = s;
      last = j;
    }
  }
  std::vector<int> labels(n);
  labels[n - 1] = static_cast<int>(last);
  for (std::size_t t = n - 1; t > 0; --t) {
    last = back[t][last];
    labels[t - 1] = static_cast<int>(last);
  }
  return labels;
}

}  // namespace pcg
