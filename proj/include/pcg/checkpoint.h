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

#ifndef PCG_CHECKPOINT_H_
#define PCG_CHECKPOINT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pcg/generator.h"
#include "pcg/parameters.h"
#include "pcg/planner.h"

namespace pcg {

// File layout: "PCGCKPT1", uint64 little-endian header length, JSON header,
// raw little-endian float64 payload, then the SHA-256 of everything before
// it. The header lists every tensor (name, shape, offset in doubles) and the
// payload's SHA-256.
struct CheckpointTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct CheckpointFile {
  std::string kind;
  nlohmann::json meta;
  std::vector<CheckpointTensor> tensors;
};

std::string sha256_hex(std::string_view bytes);
// Throws Error when the file cannot be read.
std::string file_sha256(const std::string &path);

void write_checkpoint(const std::string &path, const std::string &kind,
                      const nlohmann::json &meta, const ParameterList &tensors);

// Verifies the trailer and payload hashes before decoding anything. Throws
// IntegrityError on any mismatch or malformed content.
CheckpointFile read_checkpoint(const std::string &path);

nlohmann::json to_json(const PlannerConfig &config);
PlannerConfig planner_config_from_json(const nlohmann::json &j);
nlohmann::json to_json(const GeneratorConfig &config);
GeneratorConfig generator_config_from_json(const nlohmann::json &j);

// Training facts stored next to the weights.
struct TrainingRecord {
  int epochs = 0;
  std::vector<double> loss_trace;
  nlohmann::json extra = nlohmann::json::object();
};

void save_planner(const PlannerModel &model, const TrainingRecord &record,
                  const std::string &path);
PlannerModel load_planner(const std::string &path, TrainingRecord *record = nullptr);

// Writes the frozen (or fine-tuned) base to `base_path` and the prefixes and
// adapters to `task_path`. The task file names the base by its SHA-256 and
// file name. Returns the base hash.
std::string save_generator(const GeneratorModel &model, const TrainingRecord &record,
                           const std::string &base_path, const std::string &task_path);

// Loads a task file and the base it references. The base is looked up at
// `base_path` when given, otherwise next to the task file. Throws
// IntegrityError when the base hash differs from the recorded one.
GeneratorModel load_generator(const std::string &task_path,
                              const std::optional<std::string> &base_path = std::nullopt,
                              TrainingRecord *record = nullptr);

// Loads only a base file; task parameters are freshly initialized from
// `config` (whose architecture must match the base) and `seed`.
GeneratorModel load_generator_base(const std::string &base_path, const GeneratorConfig &config,
                                   uint64_t seed);

}  // namespace pcg

#endif  // PCG_CHECKPOINT_H_
