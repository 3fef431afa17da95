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

#include "pcg/checkpoint.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include <openssl/evp.h>

#include "pcg/errors.h"

namespace pcg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are stored little-endian");

constexpr std::string_view kMagic = "PCGCKPT1";
constexpr std::size_t kDigestBytes = 32;

using nlohmann::json;

std::string raw_sha256(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 computation failed");
  }
  return std::string(reinterpret_cast<const char *>(digest), length);
}

std::string to_hex(std::string_view raw) {
  static const char *kDigits = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 15]);
  }
  return out;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomically(const std::string &path, const std::string &bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void put_u64(std::string &out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t get_u64(std::string_view in) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[static_cast<std::size_t>(i)]);
  return v;
}

json vocab_json(const Vocab &vocab) { return vocab.tokens(); }

Vocab vocab_from_json(const json &j) {
  try {
    return Vocab::from_tokens(j.get<std::vector<std::string>>());
  } catch (const ContractError &e) {
    throw IntegrityError(std::string("checkpoint vocabulary: ") + e.what());
  }
}

json training_json(const TrainingRecord &record) {
  return {{"epochs", record.epochs}, {"loss_trace", record.loss_trace}, {"extra", record.extra}};
}

TrainingRecord training_from_json(const json &j) {
  TrainingRecord r;
  r.epochs = j.at("epochs").get<int>();
  r.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  r.extra = j.at("extra");
  return r;
}

// Copies stored values into `params`; every parameter must be present once.
void assign_tensors(const std::vector<CheckpointTensor> &stored, ParameterList params,
                    const std::string &what) {
  std::map<std::string, const CheckpointTensor *> by_name;
  for (const auto &t : stored) by_name[t.name] = &t;
  if (by_name.size() != params.size()) {
    throw IntegrityError(what + ": expected " + std::to_string(params.size()) +
                         " tensors, found " + std::to_string(by_name.size()));
  }
  for (const auto &p : params) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) throw IntegrityError(what + ": missing tensor " + p.name);
    if (it->second->shape != p.tensor.shape()) {
      throw IntegrityError(what + ": tensor " + p.name + " has shape " +
                           shape_string(it->second->shape) + ", expected " +
                           shape_string(p.tensor.shape()));
    }
  }
  for (auto &p : params) {
    const auto &values = by_name.at(p.name)->values;
    std::copy(values.begin(), values.end(), p.tensor.mutable_data().begin());
  }
}

json architecture_json(const GeneratorConfig &c) {
  return {{"d_model", c.d_model},
          {"num_heads", c.num_heads},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"ffn_dim", c.ffn_dim},
          {"max_input_length", c.max_input_length},
          {"max_target_length", c.max_target_length}};
}

}  // namespace

std::string sha256_hex(std::string_view bytes) { return to_hex(raw_sha256(bytes)); }

std::string file_sha256(const std::string &path) { return sha256_hex(read_file(path)); }

void write_checkpoint(const std::string &path, const std::string &kind, const json &meta,
                      const ParameterList &tensors) {
  std::string payload;
  json entries = json::array();
  std::size_t offset = 0;
  for (const auto &p : tensors) {
    const auto data = p.tensor.data();
    payload.append(reinterpret_cast<const char *>(data.data()), data.size() * sizeof(double));
    entries.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", offset}});
    offset += data.size();
  }
  const json header = {{"kind", kind},
                       {"meta", meta},
                       {"tensors", entries},
                       {"payload_sha256", sha256_hex(payload)}};
  const std::string header_text = header.dump();
  std::string bytes(kMagic);
  put_u64(bytes, header_text.size());
  bytes += header_text;
  bytes += payload;
  bytes += raw_sha256(bytes);
  write_file_atomically(path, bytes);
}

CheckpointFile read_checkpoint(const std::string &path) {
  const std::string bytes = read_file(path);
  const std::string_view view(bytes);
  if (view.size() < kMagic.size() + 8 + kDigestBytes || !view.starts_with(kMagic)) {
    throw IntegrityError(path + ": not a checkpoint file");
  }
  const std::string_view body = view.substr(0, view.size() - kDigestBytes);
  if (raw_sha256(body) != view.substr(body.size())) {
    throw IntegrityError(path + ": checksum mismatch, file is corrupted");
  }
  const uint64_t header_len = get_u64(body.substr(kMagic.size(), 8));
  const std::size_t header_start = kMagic.size() + 8;
  if (header_len > body.size() - header_start) {
    throw IntegrityError(path + ": header length out of range");
  }
  CheckpointFile file;
  json header;
  try {
    header = json::parse(body.substr(header_start, header_len));
    file.kind = header.at("kind").get<std::string>();
    file.meta = header.at("meta");
  } catch (const json::exception &e) {
    throw IntegrityError(path + ": malformed header: " + e.what());
  }
  const std::string_view payload = body.substr(header_start + header_len);
  if (payload.size() % sizeof(double) != 0 ||
      sha256_hex(payload) != header.value("payload_sha256", "")) {
    throw IntegrityError(path + ": payload hash mismatch");
  }
  const std::size_t count = payload.size() / sizeof(double);
  try {
    for (const auto &entry : header.at("tensors")) {
      CheckpointTensor t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<Shape>();
      const std::size_t offset = entry.at("offset").get<std::size_t>();
      const std::size_t size = shape_size(t.shape);
      if (offset > count || size > count - offset) {
        throw IntegrityError(path + ": tensor " + t.name + " exceeds the payload");
      }
      t.values.resize(size);
      std::memcpy(t.values.data(), payload.data() + offset * sizeof(double),
                  size * sizeof(double));
      file.tensors.push_back(std::move(t));
    }
  } catch (const json::exception &e) {
    throw IntegrityError(path + ": malformed tensor table: " + e.what());
  }
  return file;
}

json to_json(const PlannerConfig &c) {
  return {{"embed_dim", c.embed_dim},
          {"key_ratio", c.key_ratio},
          {"max_rank", c.max_rank},
          {"embed_init_range", c.embed_init_range}};
}

PlannerConfig planner_config_from_json(const json &j) {
  PlannerConfig c;
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.key_ratio = j.at("key_ratio").get<double>();
  c.max_rank = j.at("max_rank").get<int>();
  c.embed_init_range = j.at("embed_init_range").get<double>();
  return c;
}

json to_json(const GeneratorConfig &c) {
  json j = architecture_json(c);
  j["prefix_length"] = c.prefix_length;
  j["adapter_dim"] = c.adapter_dim;
  j["use_prefix"] = c.use_prefix;
  j["use_adapters"] = c.use_adapters;
  j["prompt"] = c.prompt;
  return j;
}

GeneratorConfig generator_config_from_json(const json &j) {
  GeneratorConfig c;
  c.d_model = j.at("d_model").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
  c.decoder_layers = j.at("decoder_layers").get<std::size_t>();
  c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
  c.max_input_length = j.at("max_input_length").get<std::size_t>();
  c.max_target_length = j.at("max_target_length").get<std::size_t>();
  c.prefix_length = j.value("prefix_length", c.prefix_length);
  c.adapter_dim = j.value("adapter_dim", c.adapter_dim);
  c.use_prefix = j.value("use_prefix", c.use_prefix);
  c.use_adapters = j.value("use_adapters", c.use_adapters);
  c.prompt = j.value("prompt", c.prompt);
  return c;
}

void save_planner(const PlannerModel &model, const TrainingRecord &record,
                  const std::string &path) {
  const json meta = {{"config", to_json(model.config())},
                     {"vocab", vocab_json(model.vocab())},
                     {"training", training_json(record)}};
  write_checkpoint(path, "planner", meta, model.parameters());
}

PlannerModel load_planner(const std::string &path, TrainingRecord *record) {
  const CheckpointFile file = read_checkpoint(path);
  if (file.kind != "planner") {
    throw IntegrityError(path + ": expected a planner checkpoint, found " + file.kind);
  }
  try {
    PlannerModel model(vocab_from_json(file.meta.at("vocab")),
                       planner_config_from_json(file.meta.at("config")), 0);
    assign_tensors(file.tensors, model.parameters(), path);
    if (record != nullptr) *record = training_from_json(file.meta.at("training"));
    return model;
  } catch (const json::exception &e) {
    throw IntegrityError(path + ": malformed planner metadata: " + e.what());
  }
}

std::string save_generator(const GeneratorModel &model, const TrainingRecord &record,
                           const std::string &base_path, const std::string &task_path) {
  const json base_meta = {{"architecture", architecture_json(model.config())},
                          {"vocab", vocab_json(model.vocab())}};
  write_checkpoint(base_path, "generator_base", base_meta, model.base_parameters());
  const std::string base_hash = file_sha256(base_path);
  const json task_meta = {
      {"config", to_json(model.config())},
      {"base_sha256", base_hash},
      {"base_file", std::filesystem::path(base_path).filename().string()},
      {"training", training_json(record)}};
  write_checkpoint(task_path, "generator_task", task_meta, model.task_parameters());
  return base_hash;
}

namespace {

struct LoadedBase {
  CheckpointFile file;
  Vocab vocab;
};

LoadedBase read_base(const std::string &base_path, const GeneratorConfig &config) {
  LoadedBase base{read_checkpoint(base_path), Vocab()};
  if (base.file.kind != "generator_base") {
    throw IntegrityError(base_path + ": expected a generator base, found " + base.file.kind);
  }
  try {
    if (base.file.meta.at("architecture") != architecture_json(config)) {
      throw ConfigError(base_path + ": base architecture " +
                        base.file.meta.at("architecture").dump() +
                        " does not match the requested " + architecture_json(config).dump());
    }
    base.vocab = vocab_from_json(base.file.meta.at("vocab"));
  } catch (const json::exception &e) {
    throw IntegrityError(base_path + ": malformed base metadata: " + e.what());
  }
  return base;
}

}  // namespace

GeneratorModel load_generator(const std::string &task_path,
                              const std::optional<std::string> &base_path,
                              TrainingRecord *record) {
  const CheckpointFile task = read_checkpoint(task_path);
  if (task.kind != "generator_task") {
    throw IntegrityError(task_path + ": expected a generator task file, found " + task.kind);
  }
  GeneratorConfig config;
  std::string expected_hash, base_file;
  try {
    config = generator_config_from_json(task.meta.at("config"));
    expected_hash = task.meta.at("base_sha256").get<std::string>();
    base_file = task.meta.at("base_file").get<std::string>();
  } catch (const json::exception &e) {
    throw IntegrityError(task_path + ": malformed task metadata: " + e.what());
  }
  const std::string resolved =
      base_path ? *base_path
                : (std::filesystem::path(task_path).parent_path() / base_file).string();
  const std::string actual_hash = file_sha256(resolved);
  if (actual_hash != expected_hash) {
    throw IntegrityError(task_path + ": base " + resolved + " has hash " + actual_hash +
                         ", expected " + expected_hash);
  }
  LoadedBase base = read_base(resolved, config);
  GeneratorModel model(base.vocab, config, 0);
  assign_tensors(base.file.tensors, model.base_parameters(), resolved);
  assign_tensors(task.tensors, model.task_parameters(), task_path);
  if (record != nullptr) {
    try {
      *record = training_from_json(task.meta.at("training"));
    } catch (const json::exception &e) {
      throw IntegrityError(task_path + ": malformed training record: " + e.what());
    }
  }
  return model;
}

GeneratorModel load_generator_base(const std::string &base_path, const GeneratorConfig &config,
                                   uint64_t seed) {
  LoadedBase base = read_base(base_path, config);
  GeneratorModel model(base.vocab, config, seed);
  assign_tensors(base.file.tensors, model.base_parameters(), base_path);
  if (config.use_prefix) {
    model.prefixes = init_task_prefix(config.prompt, config.prefix_length, model, seed);
  }
  return model;
}

}  // namespace pcg
