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


#include "pcg/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <spdlog/fmt/fmt.h>

#include "pcg/errors.h"
#include "pcg/log.h"
#include "pcg/optimizer.h"
#include "pcg/random.h"

namespace pcg {

std::vector<std::size_t> target_ids(const Tokens &summary, const Vocab &vocab,
                                    std::size_t max_target_length) {
  if (max_target_length == 0) throw ContractError("target_ids: max_target_length is 0");
  const std::size_t keep = std::min(summary.size(), max_target_length - 1);
  std::vector<std::size_t> ids;
  ids.reserve(keep + 1);
  for (std::size_t i = 0; i < keep; ++i) ids.push_back(vocab.id(summary[i]));
  ids.push_back(Vocab::kEos);
  return ids;
}

std::vector<GeneratorExample> make_generator_examples(const std::vector<Record> &records,
                                                      const Vocab &vocab,
                                                      const AliasTable &aliases,
                                                      const TrainConfig &config) {
  const GeneratorConfig g = config.generator_config();
  std::vector<GeneratorExample> out;
  out.reserve(records.size());
  for (const Record &r : records) {
    Tokens plan;
    if (config.with_plan) {
      const PlanLabels gold =
          extract_plan_labels(r.table, r.summary, aliases, config.planner.max_rank);
      plan = labels_to_plan(gold, r.table).flat_tokens();
    }
    out.push_back({build_encoder_input(plan, linearize(r.table), vocab, g.max_input_length),
                   target_ids(r.summary, vocab, g.max_target_length)});
  }
  return out;
}

double mean_lm_loss(const GeneratorModel &model, const std::vector<GeneratorExample> &examples) {
  if (examples.empty()) return 0.0;
  Tape::Pause pause;
  double total = 0.0;
  for (const auto &ex : examples) {
    total += lm_loss(ex.target_ids, encode(ex.encoder_ids, model), model).item();
  }
  return total / static_cast<double>(examples.size());
}

namespace {

std::vector<std::vector<double>> snapshot(const ParameterList &params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto &p : params) out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

void restore(ParameterList &params, const std::vector<std::vector<double>> &values) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(values[i].begin(), values[i].end(), params[i].tensor.mutable_data().begin());
  }
}

// Sets requires_grad on exactly the trainable tensors and restores the
// previous flags on destruction.
class FreezeGuard {
 public:
  FreezeGuard(const GeneratorModel &model, const ParameterList &trainable)
      : all_(model.parameters()) {
    std::set<std::string> names;
    for (const auto &p : trainable) names.insert(p.name);
    for (auto &p : all_) {
      saved_.push_back(p.tensor.requires_grad());
      p.tensor.set_requires_grad(names.contains(p.name));
    }
  }
  ~FreezeGuard() {
    for (std::size_t i = 0; i < all_.size(); ++i) all_[i].tensor.set_requires_grad(saved_[i]);
  }
  FreezeGuard(const FreezeGuard &) = delete;
  FreezeGuard &operator=(const FreezeGuard &) = delete;

 private:
  ParameterList all_;
  std::vector<bool> saved_;
};

}  // namespace

std::vector<LossPoint> fit_generator(GeneratorModel &model,
                                     const std::vector<GeneratorExample> &train,
                                     const GeneratorFitOptions &options) {
  if (train.empty()) throw ContractError("fit_generator: empty training set");
  if (options.batch_size == 0) throw ConfigError("fit_generator: batch_size must be positive");
  ParameterList params = trainable_parameters(model, options.mode);
  if (params.empty()) {
    throw ConfigError("fit_generator: mode " + options.mode + " has no trainable parameters");
  }
  FreezeGuard freeze(model, params);
  AdamW optimizer({.lr = options.learning_rate, .weight_decay = options.weight_decay});
  Rng rng(options.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  const bool early_stop = options.early_stop_patience > 0 && options.validation != nullptr &&
                          !options.validation->empty();
  double best_valid = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<std::vector<double>> best_values;

  std::vector<LossPoint> trace;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      zero_grads(params);
      for (std::size_t b = begin; b < end; ++b) {
        const GeneratorExample &ex = train[order[b]];
        Tape tape;
        Tensor loss;
        try {
          loss = lm_loss(ex.target_ids, encode(ex.encoder_ids, model), model);
        } catch (const NumericError &e) {
          throw TrainingError(fmt::format("generator diverged at epoch {}: {}", epoch, e.what()));
        }
        tape.backward(loss);
        total += loss.item();
      }
      scale_grads(params, 1.0 / static_cast<double>(end - begin));
      clip_grad_norm(params, options.clip_norm);
      optimizer.step(params);
    }
    const double train_loss = total / static_cast<double>(train.size());
    if (!std::isfinite(train_loss)) {
      throw TrainingError(fmt::format("generator loss is not finite at epoch {}", epoch));
    }
    trace.push_back({epoch, "train", train_loss});
    logger().debug("generator epoch {} train loss {:.6f}", epoch, train_loss);

    if (options.validation != nullptr && !options.validation->empty()) {
      const double valid = mean_lm_loss(model, *options.validation);
      trace.push_back({epoch, "valid", valid});
      if (early_stop) {
        if (valid < best_valid) {
          best_valid = valid;
          since_best = 0;
          best_values = snapshot(params);
        } else if (++since_best >= options.early_stop_patience) {
          logger().info("early stop at epoch {} (best valid loss {:.6f})", epoch, best_valid);
          restore(params, best_values);
          break;
        }
      }
    }
    if (options.on_epoch && options.on_epoch(epoch, train_loss, model)) break;
  }
  zero_grads(params);
  return trace;
}

GeneratorModel attach_task_parameters(const GeneratorModel &base, const GeneratorConfig &config,
                                      uint64_t seed) {
  const GeneratorConfig &b = base.config();
  if (b.d_model != config.d_model || b.num_heads != config.num_heads ||
      b.encoder_layers != config.encoder_layers || b.decoder_layers != config.decoder_layers ||
      b.ffn_dim != config.ffn_dim || b.max_input_length != config.max_input_length ||
      b.max_target_length != config.max_target_length) {
    throw ConfigError("generator architecture differs from the base model");
  }
  GeneratorModel model(base.vocab(), config, seed);
  ParameterList dst = model.base_parameters();
  const ParameterList src = base.base_parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    std::copy(src[i].tensor.data().begin(), src[i].tensor.data().end(),
              dst[i].tensor.mutable_data().begin());
  }
  if (config.use_prefix) {
    model.prefixes = init_task_prefix(config.prompt, config.prefix_length, model, seed);
  }
  return model;
}

PlannerTrainConfig planner_train_config(const TrainConfig &config) {
  PlannerTrainConfig p;
  p.epochs = config.planner_epochs;
  p.learning_rate = config.lr_planner;
  p.batch_size = config.batch_size;
  p.weight_decay = config.weight_decay;
  p.clip_norm = config.clip_norm;
  p.seed = config.seed;
  return p;
}

GeneratorTrainResult train_generator(const std::vector<Record> &records,
                                     const TrainConfig &config, const AliasTable &aliases,
                                     const GeneratorModel *base,
                                     const std::vector<Record> *validation,
                                     EpochCallback on_epoch) {
  config.validate();
  const std::string mode = config.training_mode();
  if (records.empty()) throw ContractError("train_generator: empty dataset");
  const GeneratorConfig gconfig = config.generator_config();
  std::optional<GeneratorModel> model;
  if (base != nullptr) {
    model.emplace(attach_task_parameters(*base, gconfig, config.seed));
    std::size_t unknown = 0, total = 0;
    for (const Record &r : records) {
      for (const auto &t : r.summary) unknown += model->vocab().find(t) ? 0 : 1;
      total += r.summary.size();
    }
    if (unknown > 0) {
      logger().warn("{} of {} summary tokens are unknown to the base vocabulary", unknown, total);
    }
  } else {
    const Vocab vocab =
        Vocab::build(records, config.min_freq).extended(tokenize(gconfig.prompt));
    model.emplace(vocab, gconfig, config.seed);
  }
  const auto train = make_generator_examples(records, model->vocab(), aliases, config);
  std::vector<GeneratorExample> valid;
  if (validation != nullptr) {
    valid = make_generator_examples(*validation, model->vocab(), aliases, config);
  }
  GeneratorFitOptions options;
  options.epochs = config.generator_epochs;
  options.learning_rate = config.lr_generator;
  options.batch_size = config.batch_size;
  options.weight_decay = config.weight_decay;
  options.clip_norm = config.clip_norm;
  options.seed = config.seed;
  options.mode = mode;
  options.early_stop_patience = config.early_stop_patience;
  options.validation = valid.empty() ? nullptr : &valid;
  options.on_epoch = std::move(on_epoch);
  auto trace = fit_generator(*model, train, options);
  return {std::move(*model), std::move(trace)};
}

void check_planner_vocab(const PlannerModel &planner, const std::vector<Record> &records) {
  std::set<std::string> missing;
  for (const Record &r : records) {
    for (const Slot &s : r.table.slots) {
      for (const auto &t : s.key) {
        if (!planner.vocab().find(t)) missing.insert(t);
      }
    }
  }
  if (missing.empty()) return;
  std::string list;
  for (const auto &t : missing) list += (list.empty() ? "" : ", ") + t;
  throw ConfigError("planner vocabulary does not cover table keys: " + list);
}

PipelineOutput run_pipeline(const Table &table, const PlannerModel *planner,
                            const GeneratorModel &generator, const GenerateOptions &options) {
  PipelineOutput out;
  if (planner == nullptr) {
    out.hypothesis = generate(table, nullptr, generator, options);
    return out;
  }
  out.plan_labels = predict_labels(table, *planner);
  const ContentPlan plan = labels_to_plan(*out.plan_labels, table);
  out.hypothesis = generate(table, &plan, generator, options);
  return out;
}

void write_loss_csv(const std::string &path, const std::vector<LossPoint> &trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "epoch,split,loss\n";
  for (const auto &p : trace) out << fmt::format("{},{},{:.17g}\n", p.epoch, p.split, p.loss);
}

void write_loss_csv(const std::string &path, const std::vector<double> &train_losses) {
  std::vector<LossPoint> trace;
  for (std::size_t i = 0; i < train_losses.size(); ++i) {
    trace.push_back({static_cast<int>(i + 1), "train", train_losses[i]});
  }
  write_loss_csv(path, trace);
}

}  // namespace pcg
