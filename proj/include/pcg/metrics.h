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

#ifndef PCG_METRICS_H_
#define PCG_METRICS_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "pcg/alignment.h"
#include "pcg/planner.h"
#include "pcg/table.h"

namespace pcg {

inline constexpr double kBleuEpsilon = 1e-9;

// Corpus BLEU with one reference per hypothesis. Zero clipped matches, or an
// order with no hypothesis n-grams, contribute kBleuEpsilon instead of 0.
// Throws ContractError on an empty or misaligned corpus.
double bleu(const std::vector<Tokens> &hypotheses, const std::vector<Tokens> &references,
            std::size_t max_n = 4);

struct ParentScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

// Lexical PARENT for one instance. An n-gram's entailment weight is the
// fraction of its tokens found among the table value tokens or the
// reference. Precision is the geometric mean over n = 1..4 of the weighted
// hypothesis n-gram mass. Recall is sqrt(R_ref * R_table), where R_ref is the
// geometric mean of clipped reference n-gram recall and R_table is the mean
// over non-empty slots of LCS(value, hypothesis) / |value|.
ParentScore parent_instance(const Tokens &hypothesis, const Tokens &reference,
                            const Table &table);

// Per-instance scores averaged over the corpus.
ParentScore parent(const std::vector<Tokens> &hypotheses, const std::vector<Tokens> &references,
                   const std::vector<Table> &tables);

// Fraction of gold key pairs realized in gold order. A key counts as located
// when its slot value fuzzy-matches the hypothesis. A one-key plan scores 1
// when located and 0 otherwise. Throws ContractError on an empty plan.
double word_order_accuracy(const Tokens &hypothesis, const ContentPlan &gold,
                           const Table &table, const AliasTable &aliases);

// BLEU-2 over flattened plan key tokens.
double plan_bleu2(const std::vector<ContentPlan> &predicted,
                  const std::vector<ContentPlan> &gold);

struct EvalReport {
  double bleu = 0.0;
  double parent_p = 0.0;
  double parent_r = 0.0;
  double parent_f = 0.0;
  std::optional<double> plan_accuracy;
  std::optional<double> plan_bleu2;
  double word_order_acc = 0.0;
  std::size_t n_instances = 0;
};

struct EvalInstance {
  Tokens hypothesis;
  Record record;
  std::optional<PlanLabels> predicted_labels;
};

// Scores a corpus. Gold plans come from extract_plan_labels on each record.
// word_order_acc averages over instances whose gold plan is non-empty.
EvalReport evaluate(const std::vector<EvalInstance> &instances, const AliasTable &aliases);

}  // namespace pcg

#endif  // PCG_METRICS_H_
