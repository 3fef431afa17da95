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

#include "pcg/planner.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pcg/crf.h"
#include "pcg/errors.h"
#include "pcg/optimizer.h"
#include "pcg/random.h"

namespace pcg {
namespace {

Tensor uniform_tensor(Shape shape, double range, Rng &rng) {
  std::vector<double> values(shape_size(shape));
  for (double &v : values) v = rng.uniform(-range, range);
  return Tensor::from(std::move(shape), std::move(values), true);
}

LstmParams init_lstm(std::size_t input_dim, std::size_t hidden, Rng &rng) {
  const double range = 1.0 / std::sqrt(static_cast<double>(hidden));
  LstmParams p;
  p.input_weights = uniform_tensor({input_dim, 4 * hidden}, range, rng);
  p.recurrent_weights = uniform_tensor({hidden, 4 * hidden}, range, rng);
  std::vector<double> bias(4 * hidden, 0.0);
  std::fill(bias.begin() + static_cast<std::ptrdiff_t>(hidden),
            bias.begin() + static_cast<std::ptrdiff_t>(2 * hidden), 1.0);
  p.bias = Tensor::from({4 * hidden}, std::move(bias), true);
  return p;
}

Tensor mean_embedding(const Tokens &tokens, const PlannerModel &model) {
  const std::vector<std::size_t> ids = model.vocab().encode(tokens);
  return mean(gather_rows(model.embedding, ids), 0);
}

}  // namespace

PlannerModel::PlannerModel(Vocab vocab, PlannerConfig config, uint64_t seed)
    : vocab_(std::move(vocab)), config_(config) {
  if (config_.embed_dim == 0 || config_.embed_dim % 2 != 0) {
    throw ConfigError("planner embed_dim must be a positive even number, got " +
                      std::to_string(config_.embed_dim));
  }
  if (config_.key_ratio < 0.0 || config_.key_ratio > 1.0) {
    throw ConfigError("planner key_ratio must lie in [0, 1]");
  }
  if (config_.max_rank < 1) throw ConfigError("planner max_rank must be at least 1");
  Rng rng(seed);
  const std::size_t d = config_.embed_dim;
  const std::size_t k = num_labels();
  embedding = uniform_tensor({vocab_.size(), d}, config_.embed_init_range, rng);
  forward_lstm = init_lstm(d, hidden_dim(), rng);
  backward_lstm = init_lstm(d, hidden_dim(), rng);
  emission = uniform_tensor({d, k}, std::sqrt(6.0 / static_cast<double>(d + k)), rng);
  transitions = Tensor::zeros({k + 2, k + 2}, true);
}

ParameterList PlannerModel::parameters() const {
  return {
      {"embedding", embedding},
      {"lstm_fwd.input_weights", forward_lstm.input_weights},
      {"lstm_fwd.recurrent_weights", forward_lstm.recurrent_weights},
      {"lstm_fwd.bias", forward_lstm.bias},
      {"lstm_bwd.input_weights", backward_lstm.input_weights},
      {"lstm_bwd.recurrent_weights", backward_lstm.recurrent_weights},
      {"lstm_bwd.bias", backward_lstm.bias},
      {"crf.emission", emission},
      {"crf.transitions", transitions},
  };
}

Tensor embed_slot(const Slot &slot, const PlannerModel &model) {
  const double lambda = model.config().key_ratio;
  Tensor e = scale(mean_embedding(slot.key, model), lambda);
  if (!slot.value.empty()) e = e + scale(mean_embedding(slot.value, model), 1.0 - lambda);
  return e;
}

Tensor embed_table(const Table &table, const PlannerModel &model) {
  if (table.slots.empty()) throw ContractError("embed_table: table has no slots");
  const std::size_t d = model.config().embed_dim;
  std::vector<Tensor> rows;
  rows.reserve(table.slots.size());
  for (const Slot &slot : table.slots) rows.push_back(reshape(embed_slot(slot, model), {1, d}));
  return concat(rows, 0);
}

Tensor run_lstm(const Tensor &inputs, const LstmParams &params, bool reverse) {
  if (inputs.rank() != 2 || inputs.dim(0) == 0) {
    throw ContractError("run_lstm: expected a non-empty [n x d] input");
  }
  const std::size_t n = inputs.dim(0);
  const std::size_t h = params.recurrent_weights.dim(0);
  const Tensor projected = matmul(inputs, params.input_weights) + params.bias;
  Tensor hidden = Tensor::zeros({1, h});
  Tensor cell = Tensor::zeros({h});
  std::vector<Tensor> states(n);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    const Tensor gates = reshape(
        slice(projected, 0, t, t + 1) + matmul(hidden, params.recurrent_weights), {4 * h});
    const Tensor in = sigmoid(slice(gates, 0, 0, h));
    const Tensor forget = sigmoid(slice(gates, 0, h, 2 * h));
    const Tensor candidate = tanh(slice(gates, 0, 2 * h, 3 * h));
    const Tensor out = sigmoid(slice(gates, 0, 3 * h, 4 * h));
    cell = forget * cell + in * candidate;
    hidden = reshape(out * tanh(cell), {1, h});
    states[t] = hidden;
  }
  return concat(states, 0);
}

Tensor encode_table(const Tensor &slot_embeddings, const PlannerModel &model) {
  return concat({run_lstm(slot_embeddings, model.forward_lstm, false),
                 run_lstm(slot_embeddings, model.backward_lstm, true)},
                1);
}

Tensor crf_emissions(const Tensor &encoded, const PlannerModel &model) {
  return matmul(encoded, model.emission);
}

Tensor crf_score(const Tensor &encoded, const PlanLabels &labels,
                 const PlannerModel &model) {
  return crf_path_score(crf_emissions(encoded, model), model.transitions, labels.labels);
}

Tensor crf_log_partition(const Tensor &encoded, const PlannerModel &model) {
  return crf_forward(crf_emissions(encoded, model), model.transitions);
}

Tensor crf_loss(const Tensor &encoded, const PlanLabels &gold, const PlannerModel &model) {
  const Tensor emissions = crf_emissions(encoded, model);
  return crf_forward(emissions, model.transitions) -
         crf_path_score(emissions, model.transitions, gold.labels);
}

PlanLabels viterbi_decode(const Tensor &encoded, const PlannerModel &model) {
  return PlanLabels{crf_viterbi(crf_emissions(encoded, model), model.transitions)};
}

PlanLabels predict_labels(const Table &table, const PlannerModel &model) {
  Tape::Pause pause;
  return viterbi_decode(encode_table(embed_table(table, model), model), model);
}

Tokens ContentPlan::flat_tokens() const {
  Tokens out;
  for (const Tokens &key : keys) out.insert(out.end(), key.begin(), key.end());
  return out;
}

ContentPlan labels_to_plan(const PlanLabels &labels, const Table &table) {
  if (labels.labels.size() != table.slots.size()) {
    throw ContractError("labels_to_plan: " + std::to_string(labels.labels.size()) +
                        " labels for " + std::to_string(table.slots.size()) + " slots");
  }
  ContentPlan plan;
  plan.labels = labels;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (labels.labels[i] != kNoLabel) plan.slot_indices.push_back(i);
  }
  std::stable_sort(plan.slot_indices.begin(), plan.slot_indices.end(),
                   [&](std::size_t a, std::size_t b) {
                     return labels.labels[a] < labels.labels[b];
                   });
  for (std::size_t i : plan.slot_indices) plan.keys.push_back(table.slots[i].key);
  return plan;
}

std::vector<PlannerExample> make_planner_examples(const std::vector<Record> &records,
                                                  const AliasTable &aliases, int max_rank) {
  std::vector<PlannerExample> out;
  out.reserve(records.size());
  for (const Record &r : records) {
    out.push_back({r.table, extract_plan_labels(r.table, r.summary, aliases, max_rank)});
  }
  return out;
}

std::vector<double> fit_planner(PlannerModel &model,
                                const std::vector<PlannerExample> &dataset,
                                const PlannerTrainConfig &train_config) {
  if (dataset.empty()) throw ContractError("train_planner: empty dataset");
  if (train_config.batch_size == 0) throw ConfigError("train_planner: batch_size must be positive");
  ParameterList params = model.parameters();
  AdamW optimizer({.lr = train_config.learning_rate,
                   .weight_decay = train_config.weight_decay});
  Rng rng(train_config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_losses;
  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    if (train_config.shuffle) rng.shuffle(order);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += train_config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + train_config.batch_size);
      zero_grads(params);
      for (std::size_t b = begin; b < end; ++b) {
        const PlannerExample &ex = dataset[order[b]];
        Tape tape;
        Tensor loss;
        try {
          loss = crf_loss(encode_table(embed_table(ex.table, model), model), ex.gold, model);
        } catch (const NumericError &e) {
          throw TrainingError("planner diverged at epoch " + std::to_string(epoch + 1) +
                              ": " + e.what());
        }
        tape.backward(loss);
        total += loss.item();
      }
      scale_grads(params, 1.0 / static_cast<double>(end - begin));
      clip_grad_norm(params, train_config.clip_norm);
      optimizer.step(params);
    }
    const double mean_loss = total / static_cast<double>(dataset.size());
    if (!std::isfinite(mean_loss)) {
      throw TrainingError("planner loss is not finite at epoch " + std::to_string(epoch + 1));
    }
    epoch_losses.push_back(mean_loss);
  }
  zero_grads(params);
  return epoch_losses;
}

PlannerTrainResult train_planner(const std::vector<PlannerExample> &dataset,
                                 const Vocab &vocab, const PlannerConfig &model_config,
                                 const PlannerTrainConfig &train_config) {
  PlannerTrainResult result{PlannerModel(vocab, model_config, train_config.seed), {}};
  result.epoch_losses = fit_planner(result.model, dataset, train_config);
  return result;
}

double plan_accuracy(const std::vector<PlanLabels> &predicted,
                     const std::vector<PlanLabels> &gold) {
  if (predicted.size() != gold.size()) {
    throw ContractError("plan_accuracy: " + std::to_string(predicted.size()) +
                        " predictions for " + std::to_string(gold.size()) + " references");
  }
  if (gold.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto &p = predicted[i].labels;
    const auto &g = gold[i].labels;
    if (p.size() != g.size()) {
      throw ContractError("plan_accuracy: instance " + std::to_string(i) +
                          " has mismatched lengths");
    }
    if (g.empty()) continue;
    std::size_t correct = 0;
    for (std::size_t j = 0; j < g.size(); ++j) correct += p[j] == g[j] ? 1 : 0;
    total += static_cast<double>(correct) / static_cast<double>(g.size());
  }
  return total / static_cast<double>(gold.size());
}

}  // namespace pcg
