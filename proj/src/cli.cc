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


#include "pcg/cli.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/fmt/chrono.h>
#include <spdlog/fmt/fmt.h>

#include "pcg/alignment.h"
#include "pcg/checkpoint.h"
#include "pcg/config.h"
#include "pcg/errors.h"
#include "pcg/log.h"
#include "pcg/metrics.h"
#include "pcg/random.h"
#include "pcg/trainer.h"

namespace pcg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Options shared by the training commands.
struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  std::string aliases_path;
};

void add_common(CLI::App &cmd, CommonOptions &o) {
  cmd.add_option("--config", o.config_path, "Config file (key = value lines)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--set", o.overrides, "Override a config key, key=value")->take_all();
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--aliases", o.aliases_path, "Alias table JSON")->check(CLI::ExistingFile);
}

TrainConfig resolve_config(const CommonOptions &o) {
  TrainConfig config = o.config_path.empty() ? TrainConfig{} : load_train_config(o.config_path);
  for (const auto &kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + kv + "\"");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) config.seed = *o.seed;
  return config;
}

AliasTable resolve_aliases(const std::string &path) {
  if (!path.empty()) return AliasTable::load(path);
  const std::string shipped = std::string(PCG_DATA_DIR) + "/aliases.json";
  if (fs::exists(shipped)) return AliasTable::load(shipped);
  return AliasTable();
}

json file_entry(const std::string &path) {
  return {{"path", path}, {"sha256", file_sha256(path)}};
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

// Lists inputs and produced files with their hashes. Only the manifest
// carries a timestamp, so every other artifact stays byte-reproducible.
void write_manifest(const std::string &path, const std::string &command,
                    const std::vector<std::string> &argv, const CommonOptions *common,
                    const TrainConfig *config, const std::vector<std::string> &datasets,
                    const std::vector<std::string> &inputs,
                    const std::vector<std::string> &artifacts) {
  json m;
  m["command"] = command;
  m["argv"] = argv;
  m["timestamp"] = timestamp();
  if (common != nullptr) m["config_path"] = common->config_path;
  if (config != nullptr) {
    m["seed"] = config->seed;
    m["config"] = format_train_config(*config);
  }
  m["datasets"] = json::array();
  for (const auto &p : datasets) m["datasets"].push_back(file_entry(p));
  m["inputs"] = json::array();
  for (const auto &p : inputs) m["inputs"].push_back(file_entry(p));
  m["artifacts"] = json::array();
  for (const auto &p : artifacts) m["artifacts"].push_back(file_entry(p));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << m.dump(2) << "\n";
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string &dir, const std::string &name) {
  return (fs::path(dir) / name).string();
}

json labels_json(const PlanLabels &labels) { return labels.labels; }

// ---- split ----------------------------------------------------------------

struct SplitOptions {
  std::string data, out, rest;
  std::size_t size = 0;
  uint64_t seed = 1;
};

int cmd_split(const SplitOptions &o, const std::vector<std::string> &argv) {
  const auto lines = read_lines(o.data);
  std::vector<std::size_t> nonblank;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    parse_record(lines[i], static_cast<int>(i + 1));
    nonblank.push_back(i);
  }
  if (o.size == 0 || o.size > nonblank.size()) {
    throw ConfigError(fmt::format("split: size {} with {} records available", o.size,
                                  nonblank.size()));
  }
  Rng rng(o.seed);
  std::vector<std::size_t> order = nonblank;
  rng.shuffle(order);
  std::vector<bool> chosen(lines.size(), false);
  for (std::size_t i = 0; i < o.size; ++i) chosen[order[i]] = true;
  std::string picked, rest;
  for (std::size_t i : nonblank) (chosen[i] ? picked : rest) += lines[i] + "\n";
  write_text(o.out, picked);
  std::vector<std::string> artifacts{o.out};
  if (!o.rest.empty()) {
    write_text(o.rest, rest);
    artifacts.push_back(o.rest);
  }
  write_manifest(o.out + ".manifest.json", "split", argv, nullptr, nullptr, {o.data}, {},
                 artifacts);
  logger().info("split: wrote {} of {} records to {}", o.size, nonblank.size(), o.out);
  return kExitOk;
}

// ---- train-planner --------------------------------------------------------

struct TrainPlannerOptions {
  CommonOptions common;
  std::string data, out;
};

int cmd_train_planner(const TrainPlannerOptions &o, const std::vector<std::string> &argv) {
  const TrainConfig config = resolve_config(o.common);
  config.validate();
  const AliasTable aliases = resolve_aliases(o.common.aliases_path);
  const auto records = read_records(o.data);
  if (records.empty()) throw IngestionError(o.data + ": no records");
  const auto examples = make_planner_examples(records, aliases, config.planner.max_rank);
  const Vocab vocab = Vocab::build(records, config.min_freq);
  logger().info("train-planner: {} records, vocabulary {}, {} epochs", records.size(),
                vocab.size(), config.planner_epochs);
  auto result = train_planner(examples, vocab, config.planner, planner_train_config(config));

  ensure_dir(o.out);
  const std::string ckpt = join_path(o.out, "planner.ckpt");
  const std::string csv = join_path(o.out, "planner_loss.csv");
  const std::string snapshot = join_path(o.out, "config.txt");
  TrainingRecord record;
  record.epochs = config.planner_epochs;
  record.loss_trace = result.epoch_losses;
  record.extra = {{"seed", config.seed}};
  save_planner(result.model, record, ckpt);
  write_loss_csv(csv, result.epoch_losses);
  write_text(snapshot, format_train_config(config));
  write_manifest(join_path(o.out, "manifest.json"), "train-planner", argv, &o.common, &config,
                 {o.data}, {}, {ckpt, csv, snapshot});
  if (!result.epoch_losses.empty()) {
    logger().info("train-planner: loss {:.4f} -> {:.4f}", result.epoch_losses.front(),
                  result.epoch_losses.back());
  }
  return kExitOk;
}

// ---- train-generator ------------------------------------------------------

struct TrainGeneratorOptions {
  CommonOptions common;
  std::string data, planner, out, base, valid;
  std::string ablation = "none";
};

int cmd_train_generator(const TrainGeneratorOptions &o, const std::vector<std::string> &argv) {
  TrainConfig config = resolve_config(o.common);
  apply_ablation(config, o.ablation);
  config.validate();
  config.training_mode();
  const AliasTable aliases = resolve_aliases(o.common.aliases_path);
  const auto records = read_records(o.data);
  if (records.empty()) throw IngestionError(o.data + ": no records");
  std::vector<std::string> inputs;
  if (config.with_plan) {
    if (o.planner.empty()) throw ConfigError("train-generator: --planner is required unless the ablation drops the plan");
    const PlannerModel planner = load_planner(o.planner);
    check_planner_vocab(planner, records);
    inputs.push_back(o.planner);
  }
  std::optional<GeneratorModel> base;
  if (!o.base.empty()) {
    base.emplace(load_generator_base(o.base, config.generator_config(), config.seed));
    inputs.push_back(o.base);
  }
  std::vector<Record> valid;
  std::vector<std::string> datasets{o.data};
  if (!o.valid.empty()) {
    valid = read_records(o.valid);
    datasets.push_back(o.valid);
  }
  logger().info("train-generator: {} records, ablation {}, mode {}, {} epochs", records.size(),
                o.ablation, config.training_mode(), config.generator_epochs);
  auto result = train_generator(records, config, aliases, base ? &*base : nullptr,
                                valid.empty() ? nullptr : &valid);

  ensure_dir(o.out);
  const std::string base_path = join_path(o.out, "generator_base.ckpt");
  const std::string task_path = join_path(o.out, "generator_task.ckpt");
  const std::string csv = join_path(o.out, "generator_loss.csv");
  const std::string snapshot = join_path(o.out, "config.txt");
  TrainingRecord record;
  int last_epoch = 0;
  for (const auto &p : result.loss_trace) {
    if (p.split == "train") record.loss_trace.push_back(p.loss);
    last_epoch = std::max(last_epoch, p.epoch);
  }
  record.epochs = last_epoch;
  record.extra = {{"ablation", o.ablation},
                  {"with_plan", config.with_plan},
                  {"mode", config.training_mode()},
                  {"seed", config.seed},
                  {"max_decode_length", config.max_decode_length},
                  {"beam_size", config.beam_size}};
  save_generator(result.model, record, base_path, task_path);
  write_loss_csv(csv, result.loss_trace);
  write_text(snapshot, "# ablation: " + o.ablation + "\n" + format_train_config(config));
  write_manifest(join_path(o.out, "manifest.json"), "train-generator", argv, &o.common, &config,
                 datasets, inputs, {base_path, task_path, csv, snapshot});
  if (!record.loss_trace.empty()) {
    logger().info("train-generator: loss {:.4f} -> {:.4f}", record.loss_trace.front(),
                  record.loss_trace.back());
  }
  return kExitOk;
}

// ---- plan / generate ------------------------------------------------------

struct GenerateOptionsCli {
  std::string tables, planner, generator, base, out;
  std::optional<std::size_t> beam;
  std::optional<std::size_t> max_length;
};

int cmd_plan(const GenerateOptionsCli &o, const std::vector<std::string> &argv) {
  const auto records = read_records(o.tables, false);
  const PlannerModel planner = load_planner(o.planner);
  check_planner_vocab(planner, records);
  std::string text;
  for (const Record &r : records) {
    const PlanLabels labels = predict_labels(r.table, planner);
    const ContentPlan plan = labels_to_plan(labels, r.table);
    text += json{{"source_id", r.table.source_id},
                 {"plan", detokenize(plan.flat_tokens())},
                 {"plan_labels", labels_json(labels)}}
                .dump() +
            "\n";
  }
  write_text(o.out, text);
  write_manifest(o.out + ".manifest.json", "plan", argv, nullptr, nullptr, {o.tables},
                 {o.planner}, {o.out});
  return kExitOk;
}

int cmd_generate(const GenerateOptionsCli &o, const std::vector<std::string> &argv) {
  const auto records = read_records(o.tables, false);
  TrainingRecord record;
  const GeneratorModel generator =
      load_generator(o.generator, o.base.empty() ? std::nullopt : std::optional(o.base), &record);
  const bool with_plan = record.extra.value("with_plan", true);
  std::optional<PlannerModel> planner;
  std::vector<std::string> inputs{o.generator};
  if (with_plan) {
    if (o.planner.empty()) throw ConfigError("generate: this generator expects a --planner");
    planner.emplace(load_planner(o.planner));
    check_planner_vocab(*planner, records);
    inputs.push_back(o.planner);
  }
  GenerateOptions options;
  options.beam_size = o.beam.value_or(record.extra.value("beam_size", std::size_t{1}));
  options.max_length =
      o.max_length.value_or(record.extra.value("max_decode_length", std::size_t{64}));
  if (options.beam_size == 0) throw ConfigError("generate: --beam must be positive");
  std::string text;
  for (const Record &r : records) {
    const PipelineOutput result =
        run_pipeline(r.table, planner ? &*planner : nullptr, generator, options);
    json line{{"source_id", r.table.source_id}, {"hypothesis", detokenize(result.hypothesis)}};
    if (result.plan_labels) {
      line["plan"] = detokenize(labels_to_plan(*result.plan_labels, r.table).flat_tokens());
      line["plan_labels"] = labels_json(*result.plan_labels);
    }
    text += line.dump() + "\n";
  }
  write_text(o.out, text);
  write_manifest(o.out + ".manifest.json", "generate", argv, nullptr, nullptr, {o.tables}, inputs,
                 {o.out});
  logger().info("generate: {} hypotheses written to {}", records.size(), o.out);
  return kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalOptions {
  std::string hyp, data, out, aliases;
};

int cmd_eval(const EvalOptions &o, const std::vector<std::string> &argv) {
  const auto records = read_records(o.data);
  const auto lines = read_lines(o.hyp);
  std::vector<json> hyps;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      hyps.push_back(json::parse(lines[i]));
      if (!hyps.back().contains("hypothesis")) throw IngestionError("missing \"hypothesis\"");
    } catch (const json::exception &e) {
      throw IngestionError(o.hyp + ": " + e.what(), static_cast<int>(i + 1));
    }
  }
  if (hyps.size() != records.size()) {
    throw ContractError(fmt::format("eval: {} hypotheses for {} references", hyps.size(),
                                    records.size()));
  }
  const AliasTable aliases = resolve_aliases(o.aliases);
  std::vector<EvalInstance> instances;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json &h = hyps[i];
    if (h.contains("source_id") && h["source_id"] != records[i].table.source_id) {
      throw ContractError(fmt::format("eval: hypothesis {} is for {}, reference is {}", i + 1,
                                      h["source_id"].dump(), records[i].table.source_id));
    }
    EvalInstance inst{tokenize(h["hypothesis"].get<std::string>()), records[i], std::nullopt};
    if (h.contains("plan_labels")) {
      inst.predicted_labels = PlanLabels{h["plan_labels"].get<std::vector<int>>()};
    }
    instances.push_back(std::move(inst));
  }
  const EvalReport report = evaluate(instances, aliases);
  json j{{"bleu", report.bleu},
         {"parent_p", report.parent_p},
         {"parent_r", report.parent_r},
         {"parent_f", report.parent_f},
         {"word_order_acc", report.word_order_acc},
         {"n_instances", report.n_instances}};
  if (report.plan_accuracy) j["plan_accuracy"] = *report.plan_accuracy;
  if (report.plan_bleu2) j["plan_bleu2"] = *report.plan_bleu2;
  write_text(o.out, j.dump(2) + "\n");
  write_manifest(o.out + ".manifest.json", "eval", argv, nullptr, nullptr, {o.data, o.hyp}, {},
                 {o.out});
  logger().info("eval: bleu {:.4f} parent_f {:.4f} over {} instances", report.bleu,
                report.parent_f, report.n_instances);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Content-planned prefix-controlled table-to-text generation", "pcg"};
  app.require_subcommand(1);

  SplitOptions split;
  auto *split_cmd = app.add_subcommand("split", "Sample a few-shot training subset");
  split_cmd->add_option("--data", split.data, "Input JSONL")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--size", split.size, "Number of records to keep")->required();
  split_cmd->add_option("--seed", split.seed, "Sampling seed");
  split_cmd->add_option("--out", split.out, "Output JSONL")->required();
  split_cmd->add_option("--rest", split.rest, "Optional JSONL for the remaining records");

  TrainPlannerOptions tp;
  auto *tp_cmd = app.add_subcommand("train-planner", "Train the content planner");
  tp_cmd->add_option("--data", tp.data, "Training JSONL")->required()->check(CLI::ExistingFile);
  tp_cmd->add_option("--out", tp.out, "Output directory")->required();
  add_common(*tp_cmd, tp.common);

  TrainGeneratorOptions tg;
  auto *tg_cmd = app.add_subcommand("train-generator", "Train the generator");
  tg_cmd->add_option("--data", tg.data, "Training JSONL")->required()->check(CLI::ExistingFile);
  tg_cmd->add_option("--planner", tg.planner, "Planner checkpoint")->check(CLI::ExistingFile);
  tg_cmd->add_option("--out", tg.out, "Output directory")->required();
  tg_cmd->add_option("--ablation", tg.ablation, "none, no_plan, no_spa, no_prefix, full_finetune");
  tg_cmd->add_option("--base", tg.base, "Pretrained base checkpoint")->check(CLI::ExistingFile);
  tg_cmd->add_option("--valid", tg.valid, "Validation JSONL for early stopping")
      ->check(CLI::ExistingFile);
  add_common(*tg_cmd, tg.common);

  GenerateOptionsCli gen;
  auto *plan_cmd = app.add_subcommand("plan", "Predict content plans");
  plan_cmd->add_option("--table-file", gen.tables, "Input JSONL")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--planner", gen.planner, "Planner checkpoint")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--out", gen.out, "Output JSONL")->required();

  auto *gen_cmd = app.add_subcommand("generate", "Plan and generate summaries");
  gen_cmd->add_option("--table-file", gen.tables, "Input JSONL")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--planner", gen.planner, "Planner checkpoint")->check(CLI::ExistingFile);
  gen_cmd->add_option("--generator", gen.generator, "Generator task checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--base", gen.base, "Base checkpoint (default: next to the task file)")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output JSONL")->required();
  gen_cmd->add_option("--beam", gen.beam, "Beam size (1 = greedy)");
  gen_cmd->add_option("--max-length", gen.max_length, "Maximum output tokens");

  EvalOptions ev;
  auto *eval_cmd = app.add_subcommand("eval", "Score hypotheses");
  eval_cmd->add_option("--hyp", ev.hyp, "Hypotheses JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev.data, "Reference JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev.out, "Report JSON")->required();
  eval_cmd->add_option("--aliases", ev.aliases, "Alias table JSON")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (split_cmd->parsed()) return cmd_split(split, args);
    if (tp_cmd->parsed()) return cmd_train_planner(tp, args);
    if (tg_cmd->parsed()) return cmd_train_generator(tg, args);
    if (plan_cmd->parsed()) return cmd_plan(gen, args);
    if (gen_cmd->parsed()) return cmd_generate(gen, args);
    if (eval_cmd->parsed()) return cmd_eval(ev, args);
  } catch (const TrainingError &e) {
    err << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pcg
