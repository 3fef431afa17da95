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

#ifndef PCG_CONFIG_H_
#define PCG_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "pcg/generator.h"
#include "pcg/planner.h"

namespace pcg {

struct TrainConfig {
  uint64_t seed = 1;
  int planner_epochs = 200;
  int generator_epochs = 200;
  std::size_t batch_size = 10;
  double lr_planner = 2e-4;
  double lr_generator = 1e-5;
  double weight_decay = 0.0;
  double clip_norm = 1.0;
  std::size_t min_freq = 1;
  // Stops generator training after this many epochs without validation
  // improvement. 0 disables it.
  int early_stop_patience = 0;

  bool with_plan = true;
  bool with_prefix = true;
  bool with_spa = true;
  bool finetune_base = false;

  PlannerConfig planner;
  GeneratorConfig generator;

  std::size_t max_decode_length = 64;
  std::size_t beam_size = 1;

  // Mode string for trainable_parameters. Throws ConfigError when nothing
  // would be trained.
  std::string training_mode() const;

  // Model config with the prefix/adapter switches applied.
  GeneratorConfig generator_config() const;

  // Throws ConfigError on invalid values.
  void validate() const;
};

// Parses `key = value` lines. Blank lines and text after '#' are ignored;
// missing keys keep their defaults. Throws ConfigError naming the line.
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::string &path);

// Sets one key from its text form. Throws ConfigError on unknown keys or
// malformed values.
void set_config_value(TrainConfig &config, std::string_view key, std::string_view value);

// Canonical text form listing every key; parse_train_config inverts it.
std::string format_train_config(const TrainConfig &config);

// Applies an ablation name: none, no_plan, no_spa, no_prefix, full_finetune.
// Throws ConfigError for anything else.
void apply_ablation(TrainConfig &config, std::string_view ablation);

}  // namespace pcg

#endif  // PCG_CONFIG_H_
