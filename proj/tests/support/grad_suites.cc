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

#include "support/grad_suites.h"

#include <algorithm>
#include <memory>

#include "pcg/generator.h"
#include "pcg/grad_check.h"
#include "pcg/planner.h"
#include "pcg/random.h"
#include "support/fixtures.h"

namespace pcg::testing {

namespace {

// Contracts `out` against fixed random weights so that every output element
// receives a distinct upstream gradient.
Tensor weighted_sum(const Tensor &out, const Tensor &weights) {
  return sum(mul(out, weights));
}

GradCase unary_case(std::string name, Tensor (*op)(const Tensor &), double lo,
                    double hi) {
  return {name, [op, lo, hi](uint64_t seed) {
            Rng rng(seed);
            std::vector<double> values(12);
            for (auto &v : values) v = rng.uniform(lo, hi);
            Tensor x = Tensor::from({3, 4}, values, true);
            Tensor w = random_tensor({3, 4}, rng, 1.0, false);
            return GradProblem{[=] { return weighted_sum(op(x), w); }, {x}};
          }};
}

}  // namespace

std::vector<GradCase> tensor_op_cases() {
  std::vector<GradCase> cases;
  cases.push_back({"matmul", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 4}, rng);
                     Tensor b = random_tensor({4, 2}, rng);
                     Tensor w = random_tensor({3, 2}, rng, 1.0, false);
                     return GradProblem{[=] { return weighted_sum(matmul(a, b), w); },
                                        {a, b}};
                   }});
  cases.push_back({"transpose", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 4}, rng);
                     Tensor w = random_tensor({4, 3}, rng, 1.0, false);
                     return GradProblem{[=] { return weighted_sum(transpose(a), w); },
                                        {a}};
                   }});
  cases.push_back({"add/sub/mul broadcast", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 4}, rng);
                     Tensor row = random_tensor({4}, rng);
                     Tensor s = random_tensor({1}, rng);
                     Tensor b = random_tensor({3, 4}, rng);
                     Tensor w = random_tensor({3, 4}, rng, 1.0, false);
                     return GradProblem{
                         [=] {
                           Tensor y = mul(sub(add(a, row), b), s);
                           y = mul(y, add(b, row));
                           return weighted_sum(y, w);
                         },
                         {a, row, s, b}};
                   }});
  cases.push_back({"scale/add_scalar", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({2, 5}, rng);
                     Tensor w = random_tensor({2, 5}, rng, 1.0, false);
                     return GradProblem{
                         [=] { return weighted_sum(add_scalar(scale(a, -1.7), 0.3), w); },
                         {a}};
                   }});
  cases.push_back(unary_case("relu", relu, -1.0, 1.0));
  cases.push_back(unary_case("tanh", pcg::tanh, -2.0, 2.0));
  cases.push_back(unary_case("sigmoid", sigmoid, -3.0, 3.0));
  cases.push_back(unary_case("exp", pcg::exp, -2.0, 2.0));
  cases.push_back(unary_case("log", pcg::log, 0.5, 3.0));
  cases.push_back(unary_case("softplus", softplus, -3.0, 3.0));
  cases.push_back({"sum/mean", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 4}, rng);
                     Tensor w0 = random_tensor({4}, rng, 1.0, false);
                     Tensor w1 = random_tensor({3}, rng, 1.0, false);
                     return GradProblem{
                         [=] {
                           return add(add(weighted_sum(sum(a, 0), w0),
                                          weighted_sum(mean(a, 1), w1)),
                                      scale(mean(mul(a, a)), 0.5));
                         },
                         {a}};
                   }});
  cases.push_back({"logsumexp", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 4}, rng, 2.0);
                     Tensor w0 = random_tensor({4}, rng, 1.0, false);
                     Tensor w1 = random_tensor({3}, rng, 1.0, false);
                     return GradProblem{
                         [=] {
                           return add(weighted_sum(logsumexp(a, 0), w0),
                                      weighted_sum(logsumexp(a, 1), w1));
                         },
                         {a}};
                   }});
  cases.push_back({"softmax", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 5}, rng, 2.0);
                     Tensor w = random_tensor({3, 5}, rng, 1.0, false);
                     return GradProblem{
                         [=] {
                           return add(weighted_sum(softmax(a, 1), w),
                                      weighted_sum(softmax(a, 0), w));
                         },
                         {a}};
                   }});
  cases.push_back({"log_softmax", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({3, 5}, rng, 2.0);
                     Tensor w = random_tensor({3, 5}, rng, 1.0, false);
                     return GradProblem{[=] { return weighted_sum(log_softmax(a, 1), w); },
                                        {a}};
                   }});
  cases.push_back({"layer_norm", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor x = random_tensor({3, 6}, rng, 2.0);
                     Tensor g = random_tensor({6}, rng);
                     Tensor b = random_tensor({6}, rng);
                     Tensor w = random_tensor({3, 6}, rng, 1.0, false);
                     return GradProblem{
                         [=] { return weighted_sum(layer_norm(x, g, b), w); }, {x, g, b}};
                   }});
  cases.push_back({"softmax+cross_entropy", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({4, 3}, rng);
                     Tensor b = random_tensor({3, 7}, rng);
                     std::vector<std::size_t> targets(4);
                     for (auto &t : targets) t = rng.below(7);
                     return GradProblem{
                         [=] { return cross_entropy(matmul(a, b), targets); }, {a, b}};
                   }});
  cases.push_back({"reshape/concat/slice", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor a = random_tensor({2, 3}, rng);
                     Tensor b = random_tensor({2, 2}, rng);
                     Tensor w = random_tensor({3, 2}, rng, 1.0, false);
                     return GradProblem{
                         [=] {
                           Tensor c = concat({a, b, a}, 1);        // 2 x 8
                           Tensor s = slice(c, 1, 2, 5);           // 2 x 3
                           Tensor r = reshape(s, {3, 2});
                           Tensor rows = concat({r, r}, 0);        // 6 x 2
                           return add(weighted_sum(r, w), sum(mul(rows, rows)));
                         },
                         {a, b}};
                   }});
  cases.push_back({"gather_rows/take", [](uint64_t seed) {
                     Rng rng(seed);
                     Tensor table = random_tensor({5, 3}, rng);
                     std::vector<std::size_t> ids = {4, 1, 1, 0};
                     std::vector<std::size_t> flat = {0, 7, 7, 14};
                     Tensor w = random_tensor({4, 3}, rng, 1.0, false);
                     Tensor w2 = random_tensor({4}, rng, 1.0, false);
                     return GradProblem{
                         [=] {
                           return add(weighted_sum(gather_rows(table, ids), w),
                                      weighted_sum(take(table, flat), w2));
                         },
                         {table}};
                   }});
  return cases;
}

namespace {

struct PlannerInstance {
  std::shared_ptr<PlannerModel> model;
  Table table;
  PlanLabels gold;
};

PlannerInstance small_planner(uint64_t seed) {
  Table table = make_table({{"name", "a push and a shove"},
                            {"author", "christopher kelly"},
                            {"language", ""}});
  const Record record{table, tokenize("a push and a shove by christopher kelly .")};
  PlannerConfig config;
  config.embed_dim = 6;
  config.max_rank = 3;
  auto model = std::make_shared<PlannerModel>(Vocab::build({record}), config, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (double &v : model->transitions.mutable_data()) v = rng.uniform(-0.5, 0.5);
  for (double &v : model->embedding.mutable_data()) v = rng.uniform(-1.0, 1.0);
  return {model, table, PlanLabels{{1, 2, 0}}};
}

}  // namespace

std::vector<GradCase> planner_cases() {
  std::vector<GradCase> cases;
  const ParameterList names = small_planner(0).model->parameters();
  for (std::size_t g = 0; g <= names.size(); ++g) {
    const std::string label = g < names.size() ? names[g].name : "all";
    cases.push_back({"crf_loss/" + label, [g](uint64_t seed) {
                       PlannerInstance inst = small_planner(seed);
                       std::vector<Tensor> params;
                       const ParameterList all = inst.model->parameters();
                       for (std::size_t i = 0; i < all.size(); ++i) {
                         if (g == all.size() || g == i) params.push_back(all[i].tensor);
                       }
                       auto f = [inst] {
                         const PlannerModel &m = *inst.model;
                         return crf_loss(encode_table(embed_table(inst.table, m), m),
                                         inst.gold, m);
                       };
                       return GradProblem{f, params};
                     }});
  }
  return cases;
}

namespace {

struct EncoderLayerInstance {
  std::shared_ptr<GeneratorModel> model;
  Tensor x;
  Tensor weights;
};

EncoderLayerInstance small_encoder_layer(uint64_t seed) {
  GeneratorConfig config;
  config.d_model = 8;
  config.num_heads = 2;
  config.encoder_layers = 1;
  config.decoder_layers = 0;
  config.ffn_dim = 12;
  config.prefix_length = 3;
  config.adapter_dim = 4;
  config.max_input_length = 8;
  config.prompt = "table";
  auto model = std::make_shared<GeneratorModel>(Vocab(), config, seed);
  Rng rng(seed + 17);
  for (auto &p : model->task_parameters()) {
    for (double &v : p.tensor.mutable_data()) v = rng.uniform(-1.0, 1.0);
  }
  return {model, random_tensor({4, 8}, rng, 1.0, false), random_tensor({4, 8}, rng, 1.0, false)};
}

}  // namespace

std::vector<GradCase> encoder_layer_cases() {
  const std::vector<std::string> groups = {"prefix.0.keys", "prefix.0.values",
                                           "adapter.0.attn", "adapter.0.ffn", ""};
  std::vector<GradCase> cases;
  for (const std::string &group : groups) {
    cases.push_back({"encoder_layer/" + (group.empty() ? std::string("all") : group),
                     [group](uint64_t seed) {
                       EncoderLayerInstance inst = small_encoder_layer(seed);
                       std::vector<Tensor> params;
                       for (auto &p : inst.model->task_parameters()) {
                         if (p.name.starts_with(group)) params.push_back(p.tensor);
                       }
                       auto f = [inst] {
                         const GeneratorModel &m = *inst.model;
                         return sum(mul(encoder_layer_forward(inst.x, m.base.encoder[0],
                                                              m.config().num_heads,
                                                              &m.prefixes[0], &m.adapters[0]),
                                        inst.weights));
                       };
                       return GradProblem{f, params};
                     }});
  }
  return cases;
}

std::vector<GradSuiteResult> run_grad_suite(const std::vector<GradCase> &cases,
                                            int num_seeds) {
  std::vector<GradSuiteResult> results;
  for (const auto &c : cases) {
    GradSuiteResult r{c.name, 0.0, 0};
    for (int seed = 0; seed < num_seeds; ++seed) {
      GradProblem p = c.build(static_cast<uint64_t>(seed) * 7919 + 13);
      r.worst = std::max(r.worst, grad_check(p.f, p.params));
      ++r.runs;
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace pcg::testing
