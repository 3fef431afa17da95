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

#ifndef PCG_GENERATOR_H_
#define PCG_GENERATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcg/parameters.h"
#include "pcg/planner.h"
#include "pcg/table.h"
#include "pcg/tensor.h"
#include "pcg/vocab.h"

namespace pcg {

inline constexpr std::string_view kDefaultPrompt = "summarize the following table :";

struct GeneratorConfig {
  std::size_t d_model = 128;
  std::size_t num_heads = 4;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t ffn_dim = 512;
  std::size_t prefix_length = 10;
  std::size_t adapter_dim = 64;
  std::size_t max_input_length = 256;
  std::size_t max_target_length = 128;
  bool use_prefix = true;
  bool use_adapters = true;
  std::string prompt = std::string(kDefaultPrompt);

  std::size_t head_dim() const { return d_model / num_heads; }
  // Throws ConfigError on inconsistent sizes.
  void validate() const;
  bool operator==(const GeneratorConfig &) const = default;
};

struct AttentionWeights {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;  // [d x d] and [d]
};

struct FeedForwardWeights {
  Tensor w1, b1, w2, b2;  // [d x f], [f], [f x d], [d]
};

struct LayerNormWeights {
  Tensor gain, bias;  // [d]
};

struct EncoderLayerWeights {
  AttentionWeights self_attn;
  LayerNormWeights attn_norm;
  FeedForwardWeights ffn;
  LayerNormWeights ffn_norm;
};

struct DecoderLayerWeights {
  AttentionWeights self_attn;
  LayerNormWeights self_norm;
  AttentionWeights cross_attn;
  LayerNormWeights cross_norm;
  FeedForwardWeights ffn;
  LayerNormWeights ffn_norm;
};

struct BaseTransformer {
  Tensor token_embedding;      // [|V| x d], tied with the output layer
  Tensor encoder_positions;    // [max_input_length x d]
  Tensor decoder_positions;    // [max_target_length x d]
  std::vector<EncoderLayerWeights> encoder;
  std::vector<DecoderLayerWeights> decoder;
};

// Key and value prefix rows for one encoder layer, each [L_p x d].
struct LayerPrefix {
  Tensor keys;
  Tensor values;
};
using PrefixBank = std::vector<LayerPrefix>;

// x W_down -> ReLU -> W_up, scaled by s = 1 + softplus(theta).
struct AdapterWeights {
  Tensor down;   // [d x r]
  Tensor up;     // [r x d], zero at initialization
  Tensor theta;  // [1]
};

struct LayerAdapters {
  AdapterWeights attn;
  AdapterWeights ffn;
};

class GeneratorModel {
 public:
  GeneratorModel(Vocab vocab, GeneratorConfig config, uint64_t seed);

  const Vocab &vocab() const { return vocab_; }
  const GeneratorConfig &config() const { return config_; }

  BaseTransformer base;
  PrefixBank prefixes;                // empty unless config.use_prefix
  std::vector<LayerAdapters> adapters;  // empty unless config.use_adapters

  ParameterList base_parameters() const;
  // Prefix and adapter parameters.
  ParameterList task_parameters() const;
  ParameterList parameters() const;

  // Deep copy with independent parameter storage.
  GeneratorModel clone() const;

 private:
  Vocab vocab_;
  GeneratorConfig config_;
};

// Plan tokens, SEP, then the linearized table. Table tokens are dropped from
// the right when the total would exceed `max_length`. Throws ContractError
// when the plan alone does not fit.
std::vector<std::size_t> build_encoder_input(const Tokens &plan_tokens,
                                             const Tokens &table_tokens, const Vocab &vocab,
                                             std::size_t max_length);

// Multi-head attention of `queries` over `memory`. When prefix rows are given
// they are placed in front of the projected keys and values of every head.
// `causal` masks memory positions after the query position.
Tensor multi_head_attention(const Tensor &queries, const Tensor &memory,
                            const AttentionWeights &w, std::size_t num_heads,
                            const LayerPrefix *prefix, bool causal);

// Per-head attention weights of multi_head_attention, each [T x (L_p + M)].
std::vector<Tensor> attention_probabilities(const Tensor &queries, const Tensor &memory,
                                            const AttentionWeights &w, std::size_t num_heads,
                                            const LayerPrefix *prefix, bool causal);

// Encoder self-attention with prefix rows.
Tensor prefix_attention(const Tensor &x, const AttentionWeights &w, std::size_t num_heads,
                        const LayerPrefix *prefix);

// s * ReLU(x W_down) W_up.
Tensor adapter_delta(const Tensor &x, const AdapterWeights &adapter);
// x + s * ReLU(x W_down) W_up.
Tensor scaled_parallel_adapter(const Tensor &x, const AdapterWeights &adapter);
// 1 + softplus(theta), as a one-element tensor.
Tensor adapter_scale(const AdapterWeights &adapter);

Tensor feed_forward(const Tensor &x, const FeedForwardWeights &w);

// One post-norm encoder layer. Null `prefix` or `adapters` disables them.
Tensor encoder_layer_forward(const Tensor &x, const EncoderLayerWeights &layer,
                             std::size_t num_heads, const LayerPrefix *prefix,
                             const LayerAdapters *adapters);

// Token plus position embeddings, [T x d].
Tensor embed_encoder_input(const std::vector<std::size_t> &ids, const GeneratorModel &model);

// H_enc for an encoder input. Throws ContractError if too long or empty.
Tensor encode(const std::vector<std::size_t> &ids, const GeneratorModel &model);

// Decoder logits [T x |V|] for decoder inputs (starting with BOS).
Tensor decoder_logits(const std::vector<std::size_t> &decoder_ids, const Tensor &encoded,
                      const GeneratorModel &model);

// Sum over target positions of -log P(g_i | g_<i, H_enc). `gold` must end
// with EOS; the decoder sees BOS followed by gold shifted right.
Tensor lm_loss(const std::vector<std::size_t> &gold, const Tensor &encoded,
               const GeneratorModel &model);

// Prompt token embeddings cycled to `prefix_length` rows and copied into
// every encoder layer's keys and values. An empty prompt falls back to
// N(0, 0.02) rows drawn from `seed`, with a warning.
PrefixBank init_task_prefix(std::string_view prompt, std::size_t prefix_length,
                            const GeneratorModel &model, uint64_t seed = 0);

struct GenerateOptions {
  std::size_t max_length = 64;
  std::size_t beam_size = 1;
};

// Decodes from encoder input ids; returns tokens without BOS/EOS.
std::vector<std::size_t> generate_ids(const std::vector<std::size_t> &encoder_ids,
                                      const GeneratorModel &model,
                                      const GenerateOptions &options);

// Builds the encoder input from `plan` (or none) and the table, then decodes.
Tokens generate(const Table &table, const ContentPlan *plan, const GeneratorModel &model,
                const GenerateOptions &options = {});

// Parameters updated by a training mode: "prefix_tuning" (alias "none" and
// "no_plan"), "no_spa", "no_prefix" and "full_finetune". Throws ContractError
// for anything else.
ParameterList trainable_parameters(const GeneratorModel &model, std::string_view mode);

}  // namespace pcg

#endif  // PCG_GENERATOR_H_
