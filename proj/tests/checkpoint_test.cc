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


#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pcg/checkpoint.h"
#include "pcg/errors.h"
#include "support/fixtures.h"

using namespace pcg;
namespace fs = std::filesystem;

namespace {

Record book_record() {
  return {pcg::testing::book_fixture_table(), pcg::testing::book_fixture_summary()};
}

GeneratorConfig tiny_generator_config() {
  GeneratorConfig c;
  c.d_model = 8;
  c.num_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.ffn_dim = 12;
  c.prefix_length = 3;
  c.adapter_dim = 4;
  c.max_input_length = 64;
  c.max_target_length = 32;
  c.prompt = "name";
  return c;
}

GeneratorModel tiny_generator(uint64_t seed) {
  return GeneratorModel(Vocab::build({book_record()}), tiny_generator_config(), seed);
}

Tensor forward_logits(const GeneratorModel &model) {
  Tape::Pause pause;
  const Record r = book_record();
  const auto ids = build_encoder_input({}, linearize(r.table), model.vocab(),
                                       model.config().max_input_length);
  const auto encoded = encode(ids, model);
  std::vector<std::size_t> dec{Vocab::kBos};
  for (const auto &t : r.summary) dec.push_back(model.vocab().id(t));
  return decoder_logits(dec, encoded, model);
}

void randomize_task(GeneratorModel &model, uint64_t seed) {
  Rng rng(seed);
  for (auto &p : model.task_parameters()) {
    for (double &x : p.tensor.mutable_data()) x = rng.uniform(-0.5, 0.5);
  }
}

void flip_byte(const std::string &path, std::size_t offset_from_end) {
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(f.tellg());
  const auto pos = static_cast<std::streamoff>(size - offset_from_end);
  f.seekg(pos);
  char c;
  f.get(c);
  f.seekp(pos);
  f.put(static_cast<char>(c ^ 0x5a));
}

}  // namespace

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("raw checkpoint round trip keeps names, shapes and bits") {
  const auto dir = pcg::testing::scratch_dir("ckpt_raw");
  Rng rng(4);
  ParameterList params{{"a", pcg::testing::random_tensor({2, 3}, rng)},
                       {"b", pcg::testing::random_tensor({1}, rng)},
                       {"c", Tensor::zeros({0})}};
  const std::string path = dir + "/raw.ckpt";
  write_checkpoint(path, "test", {{"note", "x"}}, params);
  const auto file = read_checkpoint(path);
  CHECK(file.kind == "test");
  CHECK(file.meta.at("note") == "x");
  REQUIRE(file.tensors.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(file.tensors[i].name == params[i].name);
    CHECK(file.tensors[i].shape == params[i].tensor.shape());
    const auto data = params[i].tensor.data();
    CHECK(std::equal(data.begin(), data.end(), file.tensors[i].values.begin(),
                     file.tensors[i].values.end()));
  }
  CHECK_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("any corrupted byte is rejected") {
  const auto dir = pcg::testing::scratch_dir("ckpt_corrupt");
  Rng rng(5);
  ParameterList params{{"a", pcg::testing::random_tensor({4, 4}, rng)}};
  const std::string path = dir + "/c.ckpt";
  for (std::size_t back : {1u, 40u, 100u, 200u}) {
    write_checkpoint(path, "test", nlohmann::json::object(), params);
    flip_byte(path, back);
    CHECK_THROWS_AS(read_checkpoint(path), IntegrityError);
  }
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "PCGCKPT1";
  }
  CHECK_THROWS_AS(read_checkpoint(path), IntegrityError);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << std::string(100, 'x');
  }
  CHECK_THROWS_AS(read_checkpoint(path), IntegrityError);
}

TEST_CASE("planner round trip predicts identical labels and emissions") {
  const auto dir = pcg::testing::scratch_dir("ckpt_planner");
  PlannerConfig config;
  config.embed_dim = 10;
  config.max_rank = 5;
  PlannerModel model(Vocab::build({book_record()}), config, 11);
  TrainingRecord record;
  record.epochs = 3;
  record.loss_trace = {3.0, 2.0, 1.5};
  const std::string path = dir + "/planner.ckpt";
  save_planner(model, record, path);

  TrainingRecord loaded_record;
  const PlannerModel loaded = load_planner(path, &loaded_record);
  CHECK(loaded.config().embed_dim == 10);
  CHECK(loaded.config().max_rank == 5);
  CHECK(loaded.vocab() == model.vocab());
  CHECK(loaded_record.epochs == 3);
  CHECK(loaded_record.loss_trace == record.loss_trace);

  const Table table = book_record().table;
  Tape::Pause pause;
  const auto a = crf_emissions(encode_table(embed_table(table, model), model), model);
  const auto b = crf_emissions(encode_table(embed_table(table, loaded), loaded), loaded);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end()));
  CHECK(predict_labels(table, model) == predict_labels(table, loaded));
}

TEST_CASE("generator round trip reproduces logits bit for bit") {
  const auto dir = pcg::testing::scratch_dir("ckpt_generator");
  GeneratorModel model = tiny_generator(21);
  randomize_task(model, 3);
  const std::string base = dir + "/base.ckpt";
  const std::string task = dir + "/task.ckpt";
  const std::string hash = save_generator(model, TrainingRecord{}, base, task);
  CHECK(hash == file_sha256(base));

  const GeneratorModel loaded = load_generator(task);
  CHECK(loaded.config() == model.config());
  const Tensor a = forward_logits(model);
  const Tensor b = forward_logits(loaded);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end()));
}

TEST_CASE("several task files share one base") {
  const auto dir = pcg::testing::scratch_dir("ckpt_shared");
  GeneratorModel model = tiny_generator(22);
  const std::string base = dir + "/base.ckpt";
  std::vector<Tensor> reference;
  for (int k = 0; k < 3; ++k) {
    randomize_task(model, 100 + static_cast<uint64_t>(k));
    save_generator(model, TrainingRecord{}, base, dir + "/task" + std::to_string(k) + ".ckpt");
    reference.push_back(forward_logits(model));
  }
  for (int k = 0; k < 3; ++k) {
    const auto loaded = load_generator(dir + "/task" + std::to_string(k) + ".ckpt", base);
    const Tensor logits = forward_logits(loaded);
    CHECK(std::equal(logits.data().begin(), logits.data().end(),
                     reference[static_cast<std::size_t>(k)].data().begin()));
  }
  // Task files hold only the task parameters.
  CHECK(fs::file_size(dir + "/task0.ckpt") < fs::file_size(base));
}

TEST_CASE("task file refuses a different base") {
  const auto dir = pcg::testing::scratch_dir("ckpt_mismatch");
  GeneratorModel a = tiny_generator(1);
  GeneratorModel b = tiny_generator(2);
  save_generator(a, TrainingRecord{}, dir + "/base_a.ckpt", dir + "/task_a.ckpt");
  save_generator(b, TrainingRecord{}, dir + "/base_b.ckpt", dir + "/task_b.ckpt");
  CHECK_THROWS_AS(load_generator(dir + "/task_a.ckpt", dir + "/base_b.ckpt"), IntegrityError);
  CHECK_NOTHROW(load_generator(dir + "/task_a.ckpt", dir + "/base_a.ckpt"));
  CHECK_THROWS_AS(load_planner(dir + "/base_a.ckpt"), IntegrityError);
}

TEST_CASE("loading a base alone gives fresh task parameters over the stored weights") {
  const auto dir = pcg::testing::scratch_dir("ckpt_base_only");
  GeneratorModel model = tiny_generator(9);
  const std::string base = dir + "/base.ckpt";
  save_generator(model, TrainingRecord{}, base, dir + "/task.ckpt");
  const GeneratorModel fresh = load_generator_base(base, tiny_generator_config(), 5);
  const auto want = model.base_parameters();
  const auto got = fresh.base_parameters();
  REQUIRE(want.size() == got.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(std::equal(want[i].tensor.data().begin(), want[i].tensor.data().end(),
                     got[i].tensor.data().begin()));
  }
  // Prefix rows come from the stored embedding of the prompt word.
  const auto row = fresh.vocab().id("name");
  const std::size_t d = fresh.config().d_model;
  const auto emb = fresh.base.token_embedding.data();
  const auto keys = fresh.prefixes[0].keys.data();
  for (std::size_t j = 0; j < d; ++j) CHECK(keys[j] == emb[row * d + j]);

  GeneratorConfig other = tiny_generator_config();
  other.d_model = 16;
  CHECK_THROWS_AS(load_generator_base(base, other, 5), ConfigError);
}
