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

#include "pcg/generator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "pcg/errors.h"
#include "pcg/log.h"
#include "pcg/random.h"

namespace pcg {
namespace {

constexpr double kMaskedLogit = -1e9;
constexpr double kFallbackPrefixStd = 0.02;
constexpr double kEmbeddingStd = 0.02;

Tensor normal_tensor(Shape shape, double stddev, Rng &rng) {
  std::vector<double> values(shape_size(shape));
  for (double &v : values) v = rng.normal(0.0, stddev);
  return Tensor::from(std::move(shape), std::move(values), true);
}

Tensor zeros_param(Shape shape) { return Tensor::zeros(std::move(shape), true); }

AttentionWeights init_attention(std::size_t d, Rng &rng) {
  const double std = 1.0 / std::sqrt(static_cast<double>(d));
  AttentionWeights w;
  w.wq = normal_tensor({d, d}, std, rng);
  w.bq = zeros_param({d});
  w.wk = normal_tensor({d, d}, std, rng);
  w.bk = zeros_param({d});
  w.wv = normal_tensor({d, d}, std, rng);
  w.bv = zeros_param({d});
  w.wo = normal_tensor({d, d}, std, rng);
  w.bo = zeros_param({d});
  return w;
}

FeedForwardWeights init_ffn(std::size_t d, std::size_t f, Rng &rng) {
  FeedForwardWeights w;
  w.w1 = normal_tensor({d, f}, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  w.b1 = zeros_param({f});
  w.w2 = normal_tensor({f, d}, 1.0 / std::sqrt(static_cast<double>(f)), rng);
  w.b2 = zeros_param({d});
  return w;
}

LayerNormWeights init_norm(std::size_t d) {
  return {Tensor::full({d}, 1.0, true), zeros_param({d})};
}

AdapterWeights init_adapter(std::size_t d, std::size_t r, Rng &rng) {
  return {normal_tensor({d, r}, 1.0 / std::sqrt(static_cast<double>(d)), rng),
          zeros_param({r, d}), zeros_param({1})};
}

void add_attention(ParameterList &out, const std::string &p, const AttentionWeights &w) {
  out.push_back({p + ".wq", w.wq});
  out.push_back({p + ".bq", w.bq});
  out.push_back({p + ".wk", w.wk});
  out.push_back({p + ".bk", w.bk});
  out.push_back({p + ".wv", w.wv});
  out.push_back({p + ".bv", w.bv});
  out.push_back({p + ".wo", w.wo});
  out.push_back({p + ".bo", w.bo});
}

void add_ffn(ParameterList &out, const std::string &p, const FeedForwardWeights &w) {
  out.push_back({p + ".w1", w.w1});
  out.push_back({p + ".b1", w.b1});
  out.push_back({p + ".w2", w.w2});
  out.push_back({p + ".b2", w.b2});
}

void add_norm(ParameterList &out, const std::string &p, const LayerNormWeights &w) {
  out.push_back({p + ".gain", w.gain});
  out.push_back({p + ".bias", w.bias});
}

void add_adapter(ParameterList &out, const std::string &p, const AdapterWeights &w) {
  out.push_back({p + ".down", w.down});
  out.push_back({p + ".up", w.up});
  out.push_back({p + ".theta", w.theta});
}

Tensor positions_for(const Tensor &table, std::size_t length, const char *what) {
  if (length == 0) throw ContractError(std::string(what) + ": empty sequence");
  if (length > table.dim(0)) {
    throw ContractError(std::string(what) + ": length " + std::to_string(length) +
                        " exceeds the " + std::to_string(table.dim(0)) + " available positions");
  }
  return slice(table, 0, 0, length);
}

void check_ids(const std::vector<std::size_t> &ids, const Vocab &vocab) {
  for (std::size_t id : ids) {
    if (id >= vocab.size()) {
      throw IndexError("token id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(vocab.size()));
    }
  }
}

}  // namespace

void GeneratorConfig::validate() const {
  if (d_model == 0 || num_heads == 0 || d_model % num_heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) +
                      ") must be a positive multiple of num_heads (" +
                      std::to_string(num_heads) + ")");
  }
  if (ffn_dim == 0) throw ConfigError("ffn_dim must be positive");
  if (use_adapters && adapter_dim == 0) throw ConfigError("adapter_dim must be positive");
  if (max_input_length == 0 || max_target_length < 2) {
    throw ConfigError("max_input_length must be positive and max_target_length at least 2");
  }
}

GeneratorModel::GeneratorModel(Vocab vocab, GeneratorConfig config, uint64_t seed)
    : vocab_(std::move(vocab)), config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.d_model;
  base.token_embedding = normal_tensor({vocab_.size(), d}, kEmbeddingStd, rng);
  base.encoder_positions = normal_tensor({config_.max_input_length, d}, kEmbeddingStd, rng);
  base.decoder_positions = normal_tensor({config_.max_target_length, d}, kEmbeddingStd, rng);
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    EncoderLayerWeights layer;
    layer.self_attn = init_attention(d, rng);
    layer.attn_norm = init_norm(d);
    layer.ffn = init_ffn(d, config_.ffn_dim, rng);
    layer.ffn_norm = init_norm(d);
    base.encoder.push_back(std::move(layer));
  }
  for (std::size_t i = 0; i < config_.decoder_layers; ++i) {
    DecoderLayerWeights layer;
    layer.self_attn = init_attention(d, rng);
    layer.self_norm = init_norm(d);
    layer.cross_attn = init_attention(d, rng);
    layer.cross_norm = init_norm(d);
    layer.ffn = init_ffn(d, config_.ffn_dim, rng);
    layer.ffn_norm = init_norm(d);
    base.decoder.push_back(std::move(layer));
  }
  if (config_.use_adapters) {
    for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
      adapters.push_back({init_adapter(d, config_.adapter_dim, rng),
                          init_adapter(d, config_.adapter_dim, rng)});
    }
  }
  if (config_.use_prefix) {
    prefixes = init_task_prefix(config_.prompt, config_.prefix_length, *this, rng.next());
  }
}

ParameterList GeneratorModel::base_parameters() const {
  ParameterList out;
  out.push_back({"embed.tokens", base.token_embedding});
  out.push_back({"embed.encoder_positions", base.encoder_positions});
  out.push_back({"embed.decoder_positions", base.decoder_positions});
  for (std::size_t i = 0; i < base.encoder.size(); ++i) {
    const std::string p = "encoder." + std::to_string(i);
    const auto &l = base.encoder[i];
    add_attention(out, p + ".self_attn", l.self_attn);
    add_norm(out, p + ".attn_norm", l.attn_norm);
    add_ffn(out, p + ".ffn", l.ffn);
    add_norm(out, p + ".ffn_norm", l.ffn_norm);
  }
  for (std::size_t i = 0; i < base.decoder.size(); ++i) {
    const std::string p = "decoder." + std::to_string(i);
    const auto &l = base.decoder[i];
    add_attention(out, p + ".self_attn", l.self_attn);
    add_norm(out, p + ".self_norm", l.self_norm);
    add_attention(out, p + ".cross_attn", l.cross_attn);
    add_norm(out, p + ".cross_norm", l.cross_norm);
    add_ffn(out, p + ".ffn", l.ffn);
    add_norm(out, p + ".ffn_norm", l.ffn_norm);
  }
  return out;
}

ParameterList GeneratorModel::task_parameters() const {
  ParameterList out;
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    const std::string p = "prefix." + std::to_string(i);
    out.push_back({p + ".keys", prefixes[i].keys});
    out.push_back({p + ".values", prefixes[i].values});
  }
  for (std::size_t i = 0; i < adapters.size(); ++i) {
    const std::string p = "adapter." + std::to_string(i);
    add_adapter(out, p + ".attn", adapters[i].attn);
    add_adapter(out, p + ".ffn", adapters[i].ffn);
  }
  return out;
}

ParameterList GeneratorModel::parameters() const {
  ParameterList out = base_parameters();
  ParameterList task = task_parameters();
  out.insert(out.end(), task.begin(), task.end());
  return out;
}

GeneratorModel GeneratorModel::clone() const {
  GeneratorModel copy = *this;
  ParameterList src = parameters();
  ParameterList dst = copy.parameters();
  // Rebind every tensor in the copy to fresh storage.
  std::map<std::string, Tensor> fresh;
  for (const auto &p : src) {
    const std::span<const double> data = p.tensor.data();
    fresh.emplace(p.name, Tensor::from(p.tensor.shape(),
                                       std::vector<double>(data.begin(), data.end()),
                                       p.tensor.requires_grad()));
  }
  auto rebind = [&](Tensor &t, const std::string &name) { t = fresh.at(name); };
  rebind(copy.base.token_embedding, "embed.tokens");
  rebind(copy.base.encoder_positions, "embed.encoder_positions");
  rebind(copy.base.decoder_positions, "embed.decoder_positions");
  auto rebind_attn = [&](AttentionWeights &w, const std::string &p) {
    rebind(w.wq, p + ".wq");
    rebind(w.bq, p + ".bq");
    rebind(w.wk, p + ".wk");
    rebind(w.bk, p + ".bk");
    rebind(w.wv, p + ".wv");
    rebind(w.bv, p + ".bv");
    rebind(w.wo, p + ".wo");
    rebind(w.bo, p + ".bo");
  };
  auto rebind_ffn = [&](FeedForwardWeights &w, const std::string &p) {
    rebind(w.w1, p + ".w1");
    rebind(w.b1, p + ".b1");
    rebind(w.w2, p + ".w2");
    rebind(w.b2, p + ".b2");
  };
  auto rebind_norm = [&](LayerNormWeights &w, const std::string &p) {
    rebind(w.gain, p + ".gain");
    rebind(w.bias, p + ".bias");
  };
  auto rebind_adapter = [&](AdapterWeights &w, const std::string &p) {
    rebind(w.down, p + ".down");
    rebind(w.up, p + ".up");
    rebind(w.theta, p + ".theta");
  };
  for (std::size_t i = 0; i < copy.base.encoder.size(); ++i) {
    const std::string p = "encoder." + std::to_string(i);
    auto &l = copy.base.encoder[i];
    rebind_attn(l.self_attn, p + ".self_attn");
    rebind_norm(l.attn_norm, p + ".attn_norm");
    rebind_ffn(l.ffn, p + ".ffn");
    rebind_norm(l.ffn_norm, p + ".ffn_norm");
  }
  for (std::size_t i = 0; i < copy.base.decoder.size(); ++i) {
    const std::string p = "decoder." + std::to_string(i);
    auto &l = copy.base.decoder[i];
    rebind_attn(l.self_attn, p + ".self_attn");
    rebind_norm(l.self_norm, p + ".self_norm");
    rebind_attn(l.cross_attn, p + ".cross_attn");
    rebind_norm(l.cross_norm, p + ".cross_norm");
    rebind_ffn(l.ffn, p + ".ffn");
    rebind_norm(l.ffn_norm, p + ".ffn_norm");
  }
  for (std::size_t i = 0; i < copy.prefixes.size(); ++i) {
    const std::string p = "prefix." + std::to_string(i);
    rebind(copy.prefixes[i].keys, p + ".keys");
    rebind(copy.prefixes[i].values, p + ".values");
  }
  for (std::size_t i = 0; i < copy.adapters.size(); ++i) {
    const std::string p = "adapter." + std::to_string(i);
    rebind_adapter(copy.adapters[i].attn, p + ".attn");
    rebind_adapter(copy.adapters[i].ffn, p + ".ffn");
  }
  return copy;
}

std::vector<std::size_t> build_encoder_input(const Tokens &plan_tokens,
                                             const Tokens &table_tokens, const Vocab &vocab,
                                             std::size_t max_length) {
  if (plan_tokens.size() + 1 > max_length) {
    throw ContractError("encoder input: plan of " + std::to_string(plan_tokens.size()) +
                        " tokens does not fit in " + std::to_string(max_length));
  }
  std::vector<std::size_t> ids = vocab.encode(plan_tokens);
  ids.push_back(Vocab::kSep);
  const std::size_t room = max_length - ids.size();
  const std::size_t keep = std::min(room, table_tokens.size());
  for (std::size_t i = 0; i < keep; ++i) ids.push_back(vocab.id(table_tokens[i]));
  return ids;
}

namespace {

struct HeadInputs {
  std::vector<Tensor> probs;  // per head, [T x (L_p + M)]
  Tensor values;              // [(L_p + M) x d]
};

HeadInputs attend(const Tensor &queries, const Tensor &memory, const AttentionWeights &w,
                  std::size_t num_heads, const LayerPrefix *prefix, bool causal) {
  const std::size_t d = queries.dim(1);
  const std::size_t dk = d / num_heads;
  const std::size_t t = queries.dim(0);
  const Tensor q = matmul(queries, w.wq) + w.bq;
  Tensor k = matmul(memory, w.wk) + w.bk;
  Tensor v = matmul(memory, w.wv) + w.bv;
  std::size_t offset = 0;
  if (prefix != nullptr && prefix->keys.defined() && prefix->keys.dim(0) > 0) {
    offset = prefix->keys.dim(0);
    k = concat({prefix->keys, k}, 0);
    v = concat({prefix->values, v}, 0);
  }
  const std::size_t m = k.dim(0);
  Tensor mask;
  if (causal) {
    std::vector<double> values(t * m, 0.0);
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = offset + i + 1; j < m; ++j) values[i * m + j] = kMaskedLogit;
    }
    mask = Tensor::from({t, m}, std::move(values));
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  HeadInputs out{{}, v};
  out.probs.reserve(num_heads);
  for (std::size_t h = 0; h < num_heads; ++h) {
    const Tensor qh = slice(q, 1, h * dk, (h + 1) * dk);
    const Tensor kh = slice(k, 1, h * dk, (h + 1) * dk);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    if (causal) scores = scores + mask;
    out.probs.push_back(softmax(scores, 1));
  }
  return out;
}

}  // namespace

std::vector<Tensor> attention_probabilities(const Tensor &queries, const Tensor &memory,
                                            const AttentionWeights &w, std::size_t num_heads,
                                            const LayerPrefix *prefix, bool causal) {
  return attend(queries, memory, w, num_heads, prefix, causal).probs;
}

Tensor multi_head_attention(const Tensor &queries, const Tensor &memory,
                            const AttentionWeights &w, std::size_t num_heads,
                            const LayerPrefix *prefix, bool causal) {
  const HeadInputs in = attend(queries, memory, w, num_heads, prefix, causal);
  const std::size_t dk = queries.dim(1) / num_heads;
  std::vector<Tensor> heads;
  heads.reserve(num_heads);
  for (std::size_t h = 0; h < num_heads; ++h) {
    heads.push_back(matmul(in.probs[h], slice(in.values, 1, h * dk, (h + 1) * dk)));
  }
  return matmul(concat(heads, 1), w.wo) + w.bo;
}

Tensor prefix_attention(const Tensor &x, const AttentionWeights &w, std::size_t num_heads,
                        const LayerPrefix *prefix) {
  return multi_head_attention(x, x, w, num_heads, prefix, false);
}

Tensor adapter_scale(const AdapterWeights &adapter) {
  return add_scalar(softplus(adapter.theta), 1.0);
}

Tensor adapter_delta(const Tensor &x, const AdapterWeights &adapter) {
  return matmul(relu(matmul(x, adapter.down)), adapter.up) * adapter_scale(adapter);
}

Tensor scaled_parallel_adapter(const Tensor &x, const AdapterWeights &adapter) {
  return x + adapter_delta(x, adapter);
}

Tensor feed_forward(const Tensor &x, const FeedForwardWeights &w) {
  return matmul(relu(matmul(x, w.w1) + w.b1), w.w2) + w.b2;
}

Tensor encoder_layer_forward(const Tensor &x, const EncoderLayerWeights &layer,
                             std::size_t num_heads, const LayerPrefix *prefix,
                             const LayerAdapters *adapters) {
  const Tensor head = prefix_attention(x, layer.self_attn, num_heads, prefix);
  // The adapter branch already carries the residual x.
  const Tensor h_attn =
      adapters != nullptr ? head + scaled_parallel_adapter(x, adapters->attn) : head + x;
  const Tensor mid = layer_norm(h_attn, layer.attn_norm.gain, layer.attn_norm.bias);
  Tensor o = feed_forward(mid, layer.ffn);
  if (adapters != nullptr) o = o + adapter_delta(mid, adapters->ffn);
  return layer_norm(mid + o, layer.ffn_norm.gain, layer.ffn_norm.bias);
}

Tensor embed_encoder_input(const std::vector<std::size_t> &ids, const GeneratorModel &model) {
  check_ids(ids, model.vocab());
  const Tensor pos = positions_for(model.base.encoder_positions, ids.size(), "encode");
  return gather_rows(model.base.token_embedding, ids) + pos;
}

Tensor encode(const std::vector<std::size_t> &ids, const GeneratorModel &model) {
  Tensor x = embed_encoder_input(ids, model);
  const std::size_t heads = model.config().num_heads;
  for (std::size_t i = 0; i < model.base.encoder.size(); ++i) {
    const LayerPrefix *prefix = i < model.prefixes.size() ? &model.prefixes[i] : nullptr;
    const LayerAdapters *adapters = i < model.adapters.size() ? &model.adapters[i] : nullptr;
    x = encoder_layer_forward(x, model.base.encoder[i], heads, prefix, adapters);
  }
  return x;
}

Tensor decoder_logits(const std::vector<std::size_t> &decoder_ids, const Tensor &encoded,
                      const GeneratorModel &model) {
  check_ids(decoder_ids, model.vocab());
  const Tensor pos = positions_for(model.base.decoder_positions, decoder_ids.size(), "decode");
  Tensor y = gather_rows(model.base.token_embedding, decoder_ids) + pos;
  const std::size_t heads = model.config().num_heads;
  for (const DecoderLayerWeights &l : model.base.decoder) {
    y = layer_norm(y + multi_head_attention(y, y, l.self_attn, heads, nullptr, true),
                   l.self_norm.gain, l.self_norm.bias);
    y = layer_norm(y + multi_head_attention(y, encoded, l.cross_attn, heads, nullptr, false),
                   l.cross_norm.gain, l.cross_norm.bias);
    y = layer_norm(y + feed_forward(y, l.ffn), l.ffn_norm.gain, l.ffn_norm.bias);
  }
  return matmul(y, transpose(model.base.token_embedding));
}

Tensor lm_loss(const std::vector<std::size_t> &gold, const Tensor &encoded,
               const GeneratorModel &model) {
  if (gold.empty() || gold.back() != Vocab::kEos) {
    throw ContractError("lm_loss: gold sequence must be non-empty and end with EOS");
  }
  std::vector<std::size_t> inputs;
  inputs.reserve(gold.size());
  inputs.push_back(Vocab::kBos);
  inputs.insert(inputs.end(), gold.begin(), gold.end() - 1);
  return cross_entropy(decoder_logits(inputs, encoded, model), gold, Reduction::kSum);
}

PrefixBank init_task_prefix(std::string_view prompt, std::size_t prefix_length,
                            const GeneratorModel &model, uint64_t seed) {
  const std::size_t d = model.config().d_model;
  const std::size_t layers = model.config().encoder_layers;
  PrefixBank bank;
  if (prefix_length == 0) return bank;
  const Tokens words = tokenize(prompt);
  std::vector<double> rows(prefix_length * d);
  if (words.empty()) {
    logger().warn("empty prefix prompt; initializing prefixes from N(0, {})",
                  kFallbackPrefixStd);
  }
  Rng rng(seed);
  for (std::size_t layer = 0; layer < layers; ++layer) {
    LayerPrefix prefix;
    for (int which = 0; which < 2; ++which) {
      if (words.empty()) {
        for (double &v : rows) v = rng.normal(0.0, kFallbackPrefixStd);
      } else {
        const auto table = model.base.token_embedding.data();
        for (std::size_t i = 0; i < prefix_length; ++i) {
          const std::size_t id = model.vocab().id(words[i % words.size()]);
          std::copy_n(table.begin() + static_cast<std::ptrdiff_t>(id * d), d,
                      rows.begin() + static_cast<std::ptrdiff_t>(i * d));
        }
      }
      Tensor t = Tensor::from({prefix_length, d}, rows, true);
      (which == 0 ? prefix.keys : prefix.values) = t;
    }
    bank.push_back(std::move(prefix));
  }
  return bank;
}

namespace {

std::vector<double> last_row_log_probs(const Tensor &logits) {
  const std::size_t t = logits.dim(0);
  const std::size_t v = logits.dim(1);
  const auto data = logits.data();
  const double *row = data.data() + (t - 1) * v;
  const double m = *std::max_element(row, row + v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v; ++i) acc += std::exp(row[i] - m);
  const double lse = m + std::log(acc);
  std::vector<double> out(v);
  for (std::size_t i = 0; i < v; ++i) out[i] = row[i] - lse;
  return out;
}

struct Hypothesis {
  std::vector<std::size_t> ids;  // starts with BOS
  double score = 0.0;
  bool finished = false;
};

}  // namespace

std::vector<std::size_t> generate_ids(const std::vector<std::size_t> &encoder_ids,
                                      const GeneratorModel &model,
                                      const GenerateOptions &options) {
  if (options.beam_size == 0) throw ContractError("generate: beam size must be positive");
  Tape::Pause pause;
  const Tensor encoded = encode(encoder_ids, model);
  const std::size_t max_steps =
      std::min(options.max_length, model.config().max_target_length - 1);
  std::vector<Hypothesis> beam = {Hypothesis{{Vocab::kBos}, 0.0, false}};
  for (std::size_t step = 0; step < max_steps; ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis &h : beam) {
      if (h.finished) {
        candidates.push_back(h);
        continue;
      }
      const std::vector<double> lp = last_row_log_probs(decoder_logits(h.ids, encoded, model));
      if (options.beam_size == 1) {
        const auto best = static_cast<std::size_t>(
            std::max_element(lp.begin(), lp.end()) - lp.begin());
        Hypothesis next = h;
        next.ids.push_back(best);
        next.score += lp[best];
        next.finished = best == Vocab::kEos;
        candidates.push_back(std::move(next));
        continue;
      }
      for (std::size_t tok = 0; tok < lp.size(); ++tok) {
        Hypothesis next = h;
        next.ids.push_back(tok);
        next.score += lp[tok];
        next.finished = tok == Vocab::kEos;
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hypothesis &a, const Hypothesis &b) { return a.score > b.score; });
    if (candidates.size() > options.beam_size) candidates.resize(options.beam_size);
    beam = std::move(candidates);
    if (std::all_of(beam.begin(), beam.end(), [](const Hypothesis &h) { return h.finished; })) {
      break;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < beam.front().ids.size(); ++i) {
    if (beam.front().ids[i] == Vocab::kEos) break;
    out.push_back(beam.front().ids[i]);
  }
  return out;
}

Tokens generate(const Table &table, const ContentPlan *plan, const GeneratorModel &model,
                const GenerateOptions &options) {
  const Tokens plan_tokens = plan != nullptr ? plan->flat_tokens() : Tokens{};
  const std::vector<std::size_t> input = build_encoder_input(
      plan_tokens, linearize(table), model.vocab(), model.config().max_input_length);
  return model.vocab().decode(generate_ids(input, model, options));
}

ParameterList trainable_parameters(const GeneratorModel &model, std::string_view mode) {
  if (mode == "prefix_tuning" || mode == "none" || mode == "no_plan") {
    return model.task_parameters();
  }
  if (mode == "no_spa" || mode == "no_prefix") {
    const std::string drop = mode == "no_spa" ? "adapter." : "prefix.";
    ParameterList out;
    for (auto &p : model.task_parameters()) {
      if (!p.name.starts_with(drop)) out.push_back(p);
    }
    return out;
  }
  if (mode == "full_finetune") return model.base_parameters();
  throw ContractError("unknown training mode \"" + std::string(mode) + "\"");
}

}  // namespace pcg
