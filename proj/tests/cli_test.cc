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


#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "pcg/checkpoint.h"
#include "pcg/metrics.h"
#include "support/fixtures.h"
#include "support/synthetic_corpus.h"

using namespace pcg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char *kTinyConfig = R"(# small models for fast runs
planner.embed_dim = 16
planner_epochs = 30
lr_planner = 1e-2
generator.d_model = 16
generator.num_heads = 2
generator.ffn_dim = 32
generator.adapter_dim = 8
generator.prefix_length = 4
generator.encoder_layers = 1
generator.decoder_layers = 1
generator.max_input_length = 96
generator.max_target_length = 48
generator.prompt = name
generator_epochs = 2
lr_generator = 1e-2
batch_size = 4
max_decode_length = 12
)";

int run(const std::string &args) {
  const std::string cmd = std::string(PCG_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write(const std::string &path, const std::string &text) {
  std::ofstream(path, std::ios::trunc) << text;
}

std::vector<std::string> lines_of(const std::string &path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Shared fixture: a workspace with toy data and a trained planner.
struct Workspace {
  std::string dir;
  Workspace() : dir(pcg::testing::scratch_dir("cli")) {
    pcg::testing::write_jsonl(dir + "/train.jsonl", pcg::testing::synthetic_humans(50, 1));
    pcg::testing::write_jsonl(dir + "/test.jsonl", pcg::testing::synthetic_humans(6, 2));
    pcg::testing::write_jsonl(dir + "/books.jsonl", pcg::testing::synthetic_books(10, 3));
    write(dir + "/tiny.cfg", kTinyConfig);
    write(dir + "/empty.jsonl", "");
  }
  std::string p(const std::string &name) const { return dir + "/" + name; }
};

const Workspace &workspace() {
  static const Workspace w;
  return w;
}

std::string planner_dir() {
  static const std::string out = [] {
    const auto &w = workspace();
    const int code = run("train-planner --data " + w.p("train.jsonl") + " --config " +
                         w.p("tiny.cfg") + " --out " + w.p("planner"));
    REQUIRE(code == 0);
    return w.p("planner");
  }();
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const auto &w = workspace();
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("train-planner --data " + w.p("missing.jsonl") + " --out " + w.p("x")) == 2);
  CHECK(run("train-planner --data " + w.p("train.jsonl")) == 2);
  write(w.p("bad.cfg"), "planner.embed_dim = 7\n");
  CHECK(run("train-planner --data " + w.p("train.jsonl") + " --config " + w.p("bad.cfg") +
            " --out " + w.p("x")) == 2);
  write(w.p("bad.jsonl"), "{\"table\": []}\n");
  CHECK(run("train-planner --data " + w.p("bad.jsonl") + " --out " + w.p("x")) == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("train-planner writes a checkpoint, a decreasing loss trace and a manifest") {
  const std::string dir = planner_dir();
  CHECK(fs::exists(dir + "/planner.ckpt"));
  const auto csv = lines_of(dir + "/planner_loss.csv");
  REQUIRE(csv.size() == 31);
  CHECK(csv[0] == "epoch,split,loss");
  const double first = std::stod(csv[1].substr(csv[1].rfind(',') + 1));
  const double last = std::stod(csv.back().substr(csv.back().rfind(',') + 1));
  CHECK(last < first);

  const json manifest = json::parse(slurp(dir + "/manifest.json"));
  CHECK(manifest["command"] == "train-planner");
  CHECK(manifest["seed"] == 1);
  CHECK(manifest.contains("timestamp"));
  REQUIRE(manifest["artifacts"].size() == 3);
  for (const auto &a : manifest["artifacts"]) {
    CHECK(a["sha256"] == file_sha256(a["path"].get<std::string>()));
  }
  CHECK(manifest["datasets"][0]["sha256"] == file_sha256(workspace().p("train.jsonl")));
}

TEST_CASE("train-planner reruns with the same seed give identical files") {
  const auto &w = workspace();
  const std::string args =
      "train-planner --data " + w.p("train.jsonl") + " --config " + w.p("tiny.cfg") +
      " --set planner_epochs=3 --seed 5 --out ";
  REQUIRE(run(args + w.p("seed_a")) == 0);
  REQUIRE(run(args + w.p("seed_b")) == 0);
  for (const char *f : {"planner.ckpt", "planner_loss.csv", "config.txt"}) {
    CHECK(file_sha256(w.p("seed_a/") + f) == file_sha256(w.p("seed_b/") + f));
  }
  REQUIRE(run("train-planner --data " + w.p("train.jsonl") + " --config " + w.p("tiny.cfg") +
              " --set planner_epochs=3 --seed 6 --out " + w.p("seed_c")) == 0);
  CHECK(file_sha256(w.p("seed_a/planner.ckpt")) != file_sha256(w.p("seed_c/planner.ckpt")));
}

TEST_CASE("train-generator ablations") {
  const auto &w = workspace();
  const std::string common =
      "train-generator --data " + w.p("train.jsonl") + " --config " + w.p("tiny.cfg");
  const std::string planner = " --planner " + planner_dir() + "/planner.ckpt";

  REQUIRE(run(common + planner + " --out " + w.p("gen_none")) == 0);
  const auto snapshot = slurp(w.p("gen_none/config.txt"));
  CHECK(snapshot.find("# ablation: none") != std::string::npos);
  CHECK(snapshot.find("with_plan = true") != std::string::npos);

  // No planner is needed once the plan is ablated.
  REQUIRE(run(common + " --ablation no_plan --out " + w.p("gen_no_plan")) == 0);
  CHECK(slurp(w.p("gen_no_plan/config.txt")).find("with_plan = false") != std::string::npos);

  REQUIRE(run(common + " --ablation full_finetune --out " + w.p("gen_full")) == 0);
  CHECK(slurp(w.p("gen_full/config.txt")).find("finetune_base = true") != std::string::npos);
  const auto full = load_generator(w.p("gen_full/generator_task.ckpt"));
  CHECK(full.task_parameters().empty());

  CHECK(run(common + " --out " + w.p("gen_missing_planner")) == 2);
  CHECK(run(common + planner + " --ablation bogus --out " + w.p("gen_bogus")) == 2);

  // A planner trained on books does not know the biography keys.
  REQUIRE(run("train-planner --data " + w.p("books.jsonl") + " --config " + w.p("tiny.cfg") +
              " --set planner_epochs=1 --out " + w.p("books_planner")) == 0);
  CHECK(run(common + " --planner " + w.p("books_planner/planner.ckpt") + " --out " +
            w.p("gen_mismatch")) == 2);
}

TEST_CASE("a prefix-tuned run on an existing base keeps the base file") {
  const auto &w = workspace();
  REQUIRE(run("train-generator --data " + w.p("train.jsonl") + " --config " + w.p("tiny.cfg") +
              " --ablation full_finetune --set generator_epochs=1 --out " + w.p("pre")) == 0);
  REQUIRE(run("train-generator --data " + w.p("train.jsonl") + " --config " + w.p("tiny.cfg") +
              " --planner " + planner_dir() + "/planner.ckpt --base " +
              w.p("pre/generator_base.ckpt") + " --out " + w.p("tuned")) == 0);
  CHECK(file_sha256(w.p("pre/generator_base.ckpt")) ==
        file_sha256(w.p("tuned/generator_base.ckpt")));
}

TEST_CASE("training divergence exits with 3") {
  const auto &w = workspace();
  CHECK(run("train-generator --data " + w.p("train.jsonl") + " --config " + w.p("tiny.cfg") +
            " --ablation full_finetune --set lr_generator=1e300 --set generator_epochs=3 --out " +
            w.p("diverged")) == 3);
}

TEST_CASE("generate is deterministic and handles empty input") {
  const auto &w = workspace();
  REQUIRE(fs::exists(w.p("gen_none/generator_task.ckpt")));
  const std::string args = "generate --table-file " + w.p("test.jsonl") + " --planner " +
                           planner_dir() + "/planner.ckpt --generator " +
                           w.p("gen_none/generator_task.ckpt") + " --beam 1 --out ";
  REQUIRE(run(args + w.p("hyp_a.jsonl")) == 0);
  REQUIRE(run(args + w.p("hyp_b.jsonl")) == 0);
  CHECK(slurp(w.p("hyp_a.jsonl")) == slurp(w.p("hyp_b.jsonl")));
  const auto lines = lines_of(w.p("hyp_a.jsonl"));
  REQUIRE(lines.size() == 6);
  const json first = json::parse(lines[0]);
  CHECK(first.contains("hypothesis"));
  CHECK(first.contains("plan"));
  CHECK(first["plan_labels"].is_array());
  CHECK(first["source_id"] == "human-0");

  REQUIRE(run("generate --table-file " + w.p("empty.jsonl") + " --planner " + planner_dir() +
              "/planner.ckpt --generator " + w.p("gen_none/generator_task.ckpt") + " --out " +
              w.p("hyp_empty.jsonl")) == 0);
  CHECK(slurp(w.p("hyp_empty.jsonl")).empty());

  // Tables without summaries are accepted.
  write(w.p("tables_only.jsonl"), "{\"table\": [[\"name\", \"maria silva\"]]}\n");
  CHECK(run("generate --table-file " + w.p("tables_only.jsonl") + " --planner " + planner_dir() +
            "/planner.ckpt --generator " + w.p("gen_none/generator_task.ckpt") + " --beam 2 --out " +
            w.p("hyp_tables.jsonl")) == 0);
  CHECK(lines_of(w.p("hyp_tables.jsonl")).size() == 1);

  CHECK(run("generate --table-file " + w.p("test.jsonl") + " --generator " +
            w.p("gen_none/generator_task.ckpt") + " --out " + w.p("hyp_x.jsonl")) == 2);
  REQUIRE(run("generate --table-file " + w.p("test.jsonl") + " --generator " +
              w.p("gen_no_plan/generator_task.ckpt") + " --out " + w.p("hyp_np.jsonl")) == 0);
  CHECK_FALSE(json::parse(lines_of(w.p("hyp_np.jsonl"))[0]).contains("plan"));
}

TEST_CASE("overfit checkpoints reproduce the training summaries") {
  const auto &w = workspace();
  pcg::testing::write_jsonl(w.p("two.jsonl"), pcg::testing::synthetic_humans(2, 40));
  REQUIRE(run("train-generator --data " + w.p("two.jsonl") + " --config " + w.p("tiny.cfg") +
              " --ablation full_finetune --set generator_epochs=300 --set lr_generator=3e-3"
              " --set batch_size=1 --set max_decode_length=40 --out " + w.p("overfit")) == 0);
  REQUIRE(run("generate --table-file " + w.p("two.jsonl") + " --generator " +
              w.p("overfit/generator_task.ckpt") + " --out " + w.p("overfit.jsonl")) == 0);
  REQUIRE(run("eval --hyp " + w.p("overfit.jsonl") + " --data " + w.p("two.jsonl") + " --out " +
              w.p("overfit_report.json")) == 0);
  const json report = json::parse(slurp(w.p("overfit_report.json")));
  CHECK(report["bleu"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("eval scores and validates alignment") {
  const auto &w = workspace();
  const auto records = pcg::testing::synthetic_humans(3, 50);
  pcg::testing::write_jsonl(w.p("ref3.jsonl"), records);
  std::string perfect;
  std::string noisy;
  std::vector<Tokens> noisy_tokens;
  for (std::size_t i = 0; i < records.size(); ++i) {
    perfect += json{{"source_id", records[i].table.source_id},
                    {"hypothesis", detokenize(records[i].summary)}}
                   .dump() +
               "\n";
    Tokens h(records[i].summary.begin(), records[i].summary.begin() + 4 + static_cast<long>(i));
    noisy_tokens.push_back(h);
    noisy += json{{"hypothesis", detokenize(h)}}.dump() + "\n";
  }
  write(w.p("perfect.jsonl"), perfect);
  write(w.p("noisy.jsonl"), noisy);

  REQUIRE(run("eval --hyp " + w.p("perfect.jsonl") + " --data " + w.p("ref3.jsonl") + " --out " +
              w.p("perfect.json")) == 0);
  const json p = json::parse(slurp(w.p("perfect.json")));
  CHECK(p["bleu"].get<double>() == doctest::Approx(1.0));
  CHECK(p["n_instances"] == 3);
  CHECK_FALSE(p.contains("plan_accuracy"));

  REQUIRE(run("eval --hyp " + w.p("noisy.jsonl") + " --data " + w.p("ref3.jsonl") + " --out " +
              w.p("noisy.json")) == 0);
  const json n = json::parse(slurp(w.p("noisy.json")));
  std::vector<EvalInstance> instances;
  for (std::size_t i = 0; i < records.size(); ++i) {
    instances.push_back({noisy_tokens[i], records[i], std::nullopt});
  }
  const EvalReport expected = evaluate(instances, pcg::testing::shipped_aliases());
  CHECK(n["bleu"].get<double>() == expected.bleu);
  CHECK(n["parent_p"].get<double>() == expected.parent_p);
  CHECK(n["parent_r"].get<double>() == expected.parent_r);
  CHECK(n["parent_f"].get<double>() == expected.parent_f);
  CHECK(n["word_order_acc"].get<double>() == expected.word_order_acc);
  for (const char *key : {"bleu", "parent_p", "parent_r", "parent_f", "word_order_acc"}) {
    CHECK(n[key].get<double>() >= 0.0);
    CHECK(n[key].get<double>() <= 1.0);
  }

  const auto two = lines_of(w.p("perfect.jsonl"));
  write(w.p("short.jsonl"), two[0] + "\n");
  CHECK(run("eval --hyp " + w.p("short.jsonl") + " --data " + w.p("ref3.jsonl") + " --out " +
            w.p("short.json")) == 2);
  write(w.p("swapped.jsonl"), two[1] + "\n" + two[0] + "\n" + two[2] + "\n");
  CHECK(run("eval --hyp " + w.p("swapped.jsonl") + " --data " + w.p("ref3.jsonl") + " --out " +
            w.p("swapped.json")) == 2);
}

TEST_CASE("eval reports plan accuracy when plans are present") {
  const auto &w = workspace();
  REQUIRE(fs::exists(w.p("hyp_a.jsonl")));
  REQUIRE(run("eval --hyp " + w.p("hyp_a.jsonl") + " --data " + w.p("test.jsonl") + " --out " +
              w.p("plan_report.json")) == 0);
  const json r = json::parse(slurp(w.p("plan_report.json")));
  REQUIRE(r.contains("plan_accuracy"));
  CHECK(r["plan_accuracy"].get<double>() >= 0.0);
  CHECK(r["plan_accuracy"].get<double>() <= 1.0);
}

TEST_CASE("split samples a deterministic subset") {
  const auto &w = workspace();
  REQUIRE(run("split --data " + w.p("train.jsonl") + " --size 10 --seed 3 --out " +
              w.p("s1.jsonl") + " --rest " + w.p("r1.jsonl")) == 0);
  REQUIRE(run("split --data " + w.p("train.jsonl") + " --size 10 --seed 3 --out " +
              w.p("s2.jsonl")) == 0);
  REQUIRE(run("split --data " + w.p("train.jsonl") + " --size 10 --seed 4 --out " +
              w.p("s3.jsonl")) == 0);
  CHECK(lines_of(w.p("s1.jsonl")).size() == 10);
  CHECK(lines_of(w.p("r1.jsonl")).size() == 40);
  CHECK(slurp(w.p("s1.jsonl")) == slurp(w.p("s2.jsonl")));
  CHECK(slurp(w.p("s1.jsonl")) != slurp(w.p("s3.jsonl")));
  CHECK(run("split --data " + w.p("train.jsonl") + " --size 51 --out " + w.p("s4.jsonl")) == 2);
}

TEST_CASE("plan subcommand") {
  const auto &w = workspace();
  REQUIRE(run("plan --table-file " + w.p("test.jsonl") + " --planner " + planner_dir() +
              "/planner.ckpt --out " + w.p("plans.jsonl")) == 0);
  const auto lines = lines_of(w.p("plans.jsonl"));
  REQUIRE(lines.size() == 6);
  CHECK(json::parse(lines[0])["plan"].is_string());
}
