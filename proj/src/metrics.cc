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

#include "pcg/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "pcg/errors.h"

namespace pcg {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Tokens &tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t total(const NgramCounts &counts) {
  std::size_t t = 0;
  for (const auto &[g, c] : counts) t += c;
  return t;
}

std::size_t clipped_matches(const NgramCounts &hyp, const NgramCounts &ref) {
  std::size_t m = 0;
  for (const auto &[g, c] : hyp) {
    const auto it = ref.find(g);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

std::size_t lcs_length(const Tokens &a, const Tokens &b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Geometric mean of the present values; 0 if any is 0, nullopt if none.
std::optional<double> geometric_mean(const std::vector<double> &values) {
  if (values.empty()) return std::nullopt;
  double log_sum = 0.0;
  for (double v : values) {
    if (v <= 0.0) return 0.0;
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

constexpr std::size_t kParentMaxN = 4;

}  // namespace

double bleu(const std::vector<Tokens> &hypotheses, const std::vector<Tokens> &references,
            std::size_t max_n) {
  if (hypotheses.size() != references.size()) {
    throw ContractError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                        std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw ContractError("bleu: empty corpus");
  if (max_n == 0) throw ContractError("bleu: max_n must be positive");
  std::vector<std::size_t> matches(max_n, 0), counts(max_n, 0);
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    hyp_len += hypotheses[i].size();
    ref_len += references[i].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const NgramCounts h = ngrams(hypotheses[i], n);
      matches[n - 1] += clipped_matches(h, ngrams(references[i], n));
      counts[n - 1] += total(h);
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_p = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    const double p = matches[n] == 0 || counts[n] == 0
                         ? kBleuEpsilon
                         : static_cast<double>(matches[n]) / static_cast<double>(counts[n]);
    log_p += std::log(p);
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) /
                                                           static_cast<double>(hyp_len))
                                      : 1.0;
  return bp * std::exp(log_p / static_cast<double>(max_n));
}

ParentScore parent_instance(const Tokens &hypothesis, const Tokens &reference,
                            const Table &table) {
  if (hypothesis.empty()) return {};
  std::set<std::string> entailed(reference.begin(), reference.end());
  for (const Slot &slot : table.slots) entailed.insert(slot.value.begin(), slot.value.end());

  std::vector<double> precisions, ref_recalls;
  for (std::size_t n = 1; n <= kParentMaxN; ++n) {
    const NgramCounts h = ngrams(hypothesis, n);
    const NgramCounts r = ngrams(reference, n);
    if (!h.empty()) {
      double weighted = 0.0;
      for (const auto &[g, c] : h) {
        std::size_t hits = 0;
        for (const auto &tok : g) hits += entailed.contains(tok) ? 1 : 0;
        weighted += static_cast<double>(c) * static_cast<double>(hits) / static_cast<double>(n);
      }
      precisions.push_back(weighted / static_cast<double>(total(h)));
    }
    if (!r.empty()) {
      ref_recalls.push_back(static_cast<double>(clipped_matches(h, r)) /
                            static_cast<double>(total(r)));
    }
  }
  ParentScore s;
  s.precision = geometric_mean(precisions).value_or(0.0);
  const double r_ref = geometric_mean(ref_recalls).value_or(0.0);
  double table_sum = 0.0;
  std::size_t filled = 0;
  for (const Slot &slot : table.slots) {
    if (slot.value.empty()) continue;
    table_sum += static_cast<double>(lcs_length(slot.value, hypothesis)) /
                 static_cast<double>(slot.value.size());
    ++filled;
  }
  s.recall = filled == 0 ? r_ref
                         : std::sqrt(r_ref * table_sum / static_cast<double>(filled));
  s.f = s.precision > 0.0 && s.recall > 0.0
            ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
            : 0.0;
  return s;
}

ParentScore parent(const std::vector<Tokens> &hypotheses, const std::vector<Tokens> &references,
                   const std::vector<Table> &tables) {
  if (hypotheses.size() != references.size() || hypotheses.size() != tables.size()) {
    throw ContractError("parent: misaligned hypotheses, references and tables");
  }
  ParentScore mean;
  if (hypotheses.empty()) return mean;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const ParentScore s = parent_instance(hypotheses[i], references[i], tables[i]);
    mean.precision += s.precision;
    mean.recall += s.recall;
    mean.f += s.f;
  }
  const double n = static_cast<double>(hypotheses.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f /= n;
  return mean;
}

double word_order_accuracy(const Tokens &hypothesis, const ContentPlan &gold,
                           const Table &table, const AliasTable &aliases) {
  const std::size_t k = gold.slot_indices.size();
  if (k == 0) throw ContractError("word_order_accuracy: empty gold plan");
  std::vector<std::optional<std::size_t>> located(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t slot = gold.slot_indices[i];
    if (slot >= table.slots.size()) {
      throw ContractError("word_order_accuracy: plan refers to slot " + std::to_string(slot));
    }
    located[i] = fuzzy_match(table.slots[slot], hypothesis, aliases);
  }
  if (k == 1) return located[0] ? 1.0 : 0.0;
  std::size_t correct = 0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (located[a] && located[b] && *located[a] < *located[b]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(k * (k - 1) / 2);
}

double plan_bleu2(const std::vector<ContentPlan> &predicted,
                  const std::vector<ContentPlan> &gold) {
  std::vector<Tokens> hyps, refs;
  for (const auto &p : predicted) hyps.push_back(p.flat_tokens());
  for (const auto &g : gold) refs.push_back(g.flat_tokens());
  return bleu(hyps, refs, 2);
}

EvalReport evaluate(const std::vector<EvalInstance> &instances, const AliasTable &aliases) {
  EvalReport report;
  report.n_instances = instances.size();
  if (instances.empty()) return report;
  std::vector<Tokens> hyps, refs;
  std::vector<Table> tables;
  std::vector<PlanLabels> predicted, gold_labels;
  std::vector<ContentPlan> predicted_plans, gold_plans;
  double order_sum = 0.0;
  std::size_t order_count = 0;
  bool all_have_plans = true;
  for (const EvalInstance &inst : instances) {
    hyps.push_back(inst.hypothesis);
    refs.push_back(inst.record.summary);
    tables.push_back(inst.record.table);
    const PlanLabels gold = extract_plan_labels(inst.record.table, inst.record.summary, aliases);
    const ContentPlan gold_plan = labels_to_plan(gold, inst.record.table);
    if (!gold_plan.slot_indices.empty()) {
      order_sum += word_order_accuracy(inst.hypothesis, gold_plan, inst.record.table, aliases);
      ++order_count;
    }
    if (inst.predicted_labels) {
      predicted.push_back(*inst.predicted_labels);
      gold_labels.push_back(gold);
      predicted_plans.push_back(labels_to_plan(*inst.predicted_labels, inst.record.table));
      gold_plans.push_back(gold_plan);
    } else {
      all_have_plans = false;
    }
  }
  report.bleu = bleu(hyps, refs);
  const ParentScore p = parent(hyps, refs, tables);
  report.parent_p = p.precision;
  report.parent_r = p.recall;
  report.parent_f = p.f;
  report.word_order_acc =
      order_count == 0 ? 0.0 : order_sum / static_cast<double>(order_count);
  if (all_have_plans) {
    report.plan_accuracy = plan_accuracy(predicted, gold_labels);
    report.plan_bleu2 = plan_bleu2(predicted_plans, gold_plans);
  }
  return report;
}

}  // namespace pcg
