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

#include "pcg/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pcg/errors.h"

namespace pcg {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid value \"" + std::string(text) + "\" for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("invalid boolean \"" + std::string(text) + "\" for " + std::string(key));
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

struct Field {
  std::function<void(TrainConfig &, std::string_view, std::string_view)> set;
  std::function<std::string(const TrainConfig &)> get;
};

template <typename T>
Field unsigned_field(T TrainConfig::*member) {
  return {[member](TrainConfig &c, std::string_view k, std::string_view v) {
            c.*member = parse_number<T>(k, v);
          },
          [member](const TrainConfig &c) { return std::to_string(c.*member); }};
}

template <typename Owner, typename T>
Field nested_field(Owner TrainConfig::*owner, T Owner::*member) {
  return {[owner, member](TrainConfig &c, std::string_view k, std::string_view v) {
            if constexpr (std::is_same_v<T, bool>) {
              c.*owner.*member = parse_bool(k, v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              c.*owner.*member = std::string(v);
            } else {
              c.*owner.*member = parse_number<T>(k, v);
            }
          },
          [owner, member](const TrainConfig &c) {
            if constexpr (std::is_same_v<T, bool>) {
              return std::string(c.*owner.*member ? "true" : "false");
            } else if constexpr (std::is_same_v<T, std::string>) {
              return c.*owner.*member;
            } else if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*owner.*member);
            } else {
              return std::to_string(c.*owner.*member);
            }
          }};
}

Field double_field(double TrainConfig::*member) {
  return {[member](TrainConfig &c, std::string_view k, std::string_view v) {
            c.*member = parse_number<double>(k, v);
          },
          [member](const TrainConfig &c) { return format_double(c.*member); }};
}

Field bool_field(bool TrainConfig::*member) {
  return {[member](TrainConfig &c, std::string_view k, std::string_view v) {
            c.*member = parse_bool(k, v);
          },
          [member](const TrainConfig &c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::map<std::string, Field, std::less<>> &fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"seed", unsigned_field(&TrainConfig::seed)},
      {"planner_epochs", unsigned_field(&TrainConfig::planner_epochs)},
      {"generator_epochs", unsigned_field(&TrainConfig::generator_epochs)},
      {"batch_size", unsigned_field(&TrainConfig::batch_size)},
      {"lr_planner", double_field(&TrainConfig::lr_planner)},
      {"lr_generator", double_field(&TrainConfig::lr_generator)},
      {"weight_decay", double_field(&TrainConfig::weight_decay)},
      {"clip_norm", double_field(&TrainConfig::clip_norm)},
      {"min_freq", unsigned_field(&TrainConfig::min_freq)},
      {"early_stop_patience", unsigned_field(&TrainConfig::early_stop_patience)},
      {"with_plan", bool_field(&TrainConfig::with_plan)},
      {"with_prefix", bool_field(&TrainConfig::with_prefix)},
      {"with_spa", bool_field(&TrainConfig::with_spa)},
      {"finetune_base", bool_field(&TrainConfig::finetune_base)},
      {"max_decode_length", unsigned_field(&TrainConfig::max_decode_length)},
      {"beam_size", unsigned_field(&TrainConfig::beam_size)},
      {"planner.embed_dim", nested_field(&TrainConfig::planner, &PlannerConfig::embed_dim)},
      {"planner.key_ratio", nested_field(&TrainConfig::planner, &PlannerConfig::key_ratio)},
      {"planner.max_rank", nested_field(&TrainConfig::planner, &PlannerConfig::max_rank)},
      {"generator.d_model", nested_field(&TrainConfig::generator, &GeneratorConfig::d_model)},
      {"generator.num_heads", nested_field(&TrainConfig::generator, &GeneratorConfig::num_heads)},
      {"generator.encoder_layers",
       nested_field(&TrainConfig::generator, &GeneratorConfig::encoder_layers)},
      {"generator.decoder_layers",
       nested_field(&TrainConfig::generator, &GeneratorConfig::decoder_layers)},
      {"generator.ffn_dim", nested_field(&TrainConfig::generator, &GeneratorConfig::ffn_dim)},
      {"generator.prefix_length",
       nested_field(&TrainConfig::generator, &GeneratorConfig::prefix_length)},
      {"generator.adapter_dim",
       nested_field(&TrainConfig::generator, &GeneratorConfig::adapter_dim)},
      {"generator.max_input_length",
       nested_field(&TrainConfig::generator, &GeneratorConfig::max_input_length)},
      {"generator.max_target_length",
       nested_field(&TrainConfig::generator, &GeneratorConfig::max_target_length)},
      {"generator.prompt", nested_field(&TrainConfig::generator, &GeneratorConfig::prompt)},
  };
  return table;
}

}  // namespace

std::string TrainConfig::training_mode() const {
  if (finetune_base) return "full_finetune";
  if (with_prefix && with_spa) return "prefix_tuning";
  if (with_prefix) return "no_spa";
  if (with_spa) return "no_prefix";
  throw ConfigError(
      "nothing to train: with_prefix, with_spa and finetune_base are all false");
}

GeneratorConfig TrainConfig::generator_config() const {
  GeneratorConfig g = generator;
  g.use_prefix = with_prefix;
  g.use_adapters = with_spa;
  return g;
}

void TrainConfig::validate() const {
  if (lr_planner <= 0.0 || lr_generator <= 0.0) {
    throw ConfigError("learning rates must be positive");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (planner_epochs < 0 || generator_epochs < 0) throw ConfigError("epochs must be >= 0");
  if (clip_norm <= 0.0) throw ConfigError("clip_norm must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (beam_size == 0) throw ConfigError("beam_size must be positive");
  if (planner.embed_dim == 0 || planner.embed_dim % 2 != 0) {
    throw ConfigError("planner.embed_dim must be a positive even number");
  }
  if (planner.key_ratio < 0.0 || planner.key_ratio > 1.0) {
    throw ConfigError("planner.key_ratio must lie in [0, 1]");
  }
  generator_config().validate();
}

void set_config_value(TrainConfig &config, std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key \"" + std::string(key) + "\"");
  it->second.set(config, key, value);
}

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig config;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_number) + ": expected key = value");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError &e) {
      throw ConfigError("config line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

TrainConfig load_train_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_train_config(buffer.str());
}

std::string format_train_config(const TrainConfig &config) {
  std::string out;
  for (const auto &[key, field] : fields()) out += key + " = " + field.get(config) + "\n";
  return out;
}

void apply_ablation(TrainConfig &config, std::string_view ablation) {
  if (ablation == "none") return;
  if (ablation == "no_plan") {
    config.with_plan = false;
  } else if (ablation == "no_spa") {
    config.with_spa = false;
  } else if (ablation == "no_prefix") {
    config.with_prefix = false;
  } else if (ablation == "full_finetune") {
    config.with_plan = false;
    config.with_prefix = false;
    config.with_spa = false;
    config.finetune_base = true;
  } else {
    throw ConfigError("unknown ablation \"" + std::string(ablation) + "\"");
  }
}

}  // namespace pcg
