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


#ifndef PCG_TRAINER_H_
#define PCG_TRAINER_H_

// Generator training loop and the planner-to-generator pipeline.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcg/alignment.h"
#include "pcg/config.h"
#include "pcg/generator.h"
#include "pcg/planner.h"
#include "pcg/table.h"

namespace pcg {

// One encoded training pair. `target_ids` ends with EOS.
struct GeneratorExample {
  std::vector<std::size_t> encoder_ids;
  std::vector<std::size_t> target_ids;
};

// Summary ids truncated to `max_target_length - 1`, then EOS.
std::vector<std::size_t> target_ids(const Tokens &summary, const Vocab &vocab,
                                    std::size_t max_target_length);

// Encoder inputs carry the gold extracted plan when `config.with_plan`,
// otherwise an empty plan.
std::vector<GeneratorExample> make_generator_examples(const std::vector<Record> &records,
                                                      const Vocab &vocab,
                                                      const AliasTable &aliases,
                                                      const TrainConfig &config);

struct LossPoint {
  int epoch = 0;  // 1-based
  std::string split;  // "train" or "valid"
  double loss = 0.0;  // mean summed token cross-entropy per record

  bool operator==(const LossPoint &) const = default;
};

// Called after every epoch with the mean training loss. Returning true stops
// training.
using EpochCallback = std::function<bool(int epoch, double train_loss, const GeneratorModel &)>;

struct GeneratorFitOptions {
  int epochs = 200;
  double learning_rate = 1e-5;
  std::size_t batch_size = 10;
  double weight_decay = 0.0;
  double clip_norm = 1.0;
  uint64_t seed = 1;
  std::string mode = "prefix_tuning";
  // With a validation set, stop after this many epochs without improvement
  // and restore the best trainable values. 0 disables it.
  int early_stop_patience = 0;
  const std::vector<GeneratorExample> *validation = nullptr;
  EpochCallback on_epoch;
};

// Trains `model` in place; only trainable_parameters(model, mode) change.
// Throws TrainingError when the loss or a gradient stops being finite.
std::vector<LossPoint> fit_generator(GeneratorModel &model,
                                     const std::vector<GeneratorExample> &train,
                                     const GeneratorFitOptions &options);

// Mean lm_loss over the examples, without recording a tape.
double mean_lm_loss(const GeneratorModel &model, const std::vector<GeneratorExample> &examples);

// Fresh task parameters for `config` on top of a copy of `base`'s base
// weights. Throws ConfigError when the architectures differ.
GeneratorModel attach_task_parameters(const GeneratorModel &base, const GeneratorConfig &config,
                                      uint64_t seed);

struct GeneratorTrainResult {
  GeneratorModel model;
  std::vector<LossPoint> loss_trace;
};

// Builds the vocabulary (or takes the one of `base`), initializes the model
// and trains it. Throws ConfigError when nothing is trainable.
GeneratorTrainResult train_generator(const std::vector<Record> &records,
                                     const TrainConfig &config, const AliasTable &aliases,
                                     const GeneratorModel *base = nullptr,
                                     const std::vector<Record> *validation = nullptr,
                                     EpochCallback on_epoch = {});

PlannerTrainConfig planner_train_config(const TrainConfig &config);

// Throws ConfigError listing key tokens of `records` unknown to the planner.
void check_planner_vocab(const PlannerModel &planner, const std::vector<Record> &records);

struct PipelineOutput {
  Tokens hypothesis;
  std::optional<PlanLabels> plan_labels;  // set when a planner ran
};

// Predicts a plan with `planner` (when given) and decodes a summary.
PipelineOutput run_pipeline(const Table &table, const PlannerModel *planner,
                            const GeneratorModel &generator, const GenerateOptions &options);

// CSV with header "epoch,split,loss".
void write_loss_csv(const std::string &path, const std::vector<LossPoint> &trace);
void write_loss_csv(const std::string &path, const std::vector<double> &train_losses);

}  // namespace pcg

#endif  // PCG_TRAINER_H_
