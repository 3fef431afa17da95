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

#ifndef PCG_PLANNER_H_
#define PCG_PLANNER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pcg/alignment.h"
#include "pcg/parameters.h"
#include "pcg/table.h"
#include "pcg/tensor.h"
#include "pcg/vocab.h"

namespace pcg {

struct PlannerConfig {
  std::size_t embed_dim = 128;  // must be even
  double key_ratio = 0.7;       // weight of the key embedding in a slot
  int max_rank = kDefaultMaxRank;
  double embed_init_range = 0.1;
};

// Gate layout along the 4h axis is [input, forget, cell, output].
struct LstmParams {
  Tensor input_weights;      // [d_e x 4h]
  Tensor recurrent_weights;  // [h x 4h]
  Tensor bias;               // [4h]
};

class PlannerModel {
 public:
  PlannerModel(Vocab vocab, PlannerConfig config, uint64_t seed);

  const Vocab &vocab() const { return vocab_; }
  const PlannerConfig &config() const { return config_; }
  std::size_t num_labels() const { return static_cast<std::size_t>(config_.max_rank) + 1; }
  std::size_t hidden_dim() const { return config_.embed_dim / 2; }

  Tensor embedding;    // [|V| x d_e]
  LstmParams forward_lstm;
  LstmParams backward_lstm;
  Tensor emission;     // [d_e x K]
  Tensor transitions;  // [(K+2) x (K+2)], START = K, STOP = K+1

  // Stable names used by the optimizer and checkpoints.
  ParameterList parameters() const;

 private:
  Vocab vocab_;
  PlannerConfig config_;
};

// lambda * mean(key embeddings) + (1 - lambda) * mean(value embeddings).
Tensor embed_slot(const Slot &slot, const PlannerModel &model);

// Stacked slot embeddings, [n x d_e].
Tensor embed_table(const Table &table, const PlannerModel &model);

// Runs one LSTM over the rows of `inputs` ([n x d_e]) and returns the hidden
// states [n x h] in input order. `reverse` processes the rows last to first.
Tensor run_lstm(const Tensor &inputs, const LstmParams &params, bool reverse);

// h_i = [forward state i ; backward state i], [n x d_e].
Tensor encode_table(const Tensor &slot_embeddings, const PlannerModel &model);

// Emission scores W_CRF^T h_i for every slot, [n x K].
Tensor crf_emissions(const Tensor &encoded, const PlannerModel &model);

Tensor crf_score(const Tensor &encoded, const PlanLabels &labels,
                 const PlannerModel &model);
Tensor crf_log_partition(const Tensor &encoded, const PlannerModel &model);
// log Z - score(gold).
Tensor crf_loss(const Tensor &encoded, const PlanLabels &gold,
                const PlannerModel &model);
PlanLabels viterbi_decode(const Tensor &encoded, const PlannerModel &model);

// Embeds, encodes and decodes a table.
PlanLabels predict_labels(const Table &table, const PlannerModel &model);

struct ContentPlan {
  std::vector<std::size_t> slot_indices;  // selected slots in plan order
  std::vector<Tokens> keys;
  PlanLabels labels;

  // Key tokens of every selected slot, concatenated.
  Tokens flat_tokens() const;
};

ContentPlan labels_to_plan(const PlanLabels &labels, const Table &table);

struct PlannerExample {
  Table table;
  PlanLabels gold;
};

std::vector<PlannerExample> make_planner_examples(const std::vector<Record> &records,
                                                  const AliasTable &aliases,
                                                  int max_rank = kDefaultMaxRank);

struct PlannerTrainConfig {
  int epochs = 30;
  double learning_rate = 2e-4;
  std::size_t batch_size = 10;
  double weight_decay = 0.0;
  double clip_norm = 1.0;
  uint64_t seed = 1;
  bool shuffle = true;
};

struct PlannerTrainResult {
  PlannerModel model;
  std::vector<double> epoch_losses;  // mean L_CRF per epoch
};

// Trains from scratch. Throws TrainingError when the loss stops being finite.
PlannerTrainResult train_planner(const std::vector<PlannerExample> &dataset,
                                 const Vocab &vocab, const PlannerConfig &model_config,
                                 const PlannerTrainConfig &train_config);

// Continues training an existing model in place and returns per-epoch losses.
std::vector<double> fit_planner(PlannerModel &model,
                                const std::vector<PlannerExample> &dataset,
                                const PlannerTrainConfig &train_config);

// Mean over instances of the fraction of positions labelled correctly.
double plan_accuracy(const std::vector<PlanLabels> &predicted,
                     const std::vector<PlanLabels> &gold);

}  // namespace pcg

#endif  // PCG_PLANNER_H_
