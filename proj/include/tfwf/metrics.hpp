/* Copyright 2026 The TFWaveFormer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "tfwf/errors.hpp"
#include "tfwf/temporal_graph.hpp"

namespace tfwf {

struct ScoredPair {
  double score = 0.0;
  bool label = false;
  NodeId u = 0;
  NodeId v = 0;
  double t = 0.0;
};

// Mean over positives of precision at the positive's rank. Ranks come from a
// stable descending sort, so tied scores keep their input order.
inline double average_precision(const std::vector<ScoredPair>& pairs) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].score > pairs[b].score; });
  std::size_t hits = 0;
  double total = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!pairs[order[r]].label) continue;
    ++hits;
    total += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) throw ContractError("average_precision: no positive pairs");
  return total / static_cast<double>(hits);
}

// Probability that a random positive outscores a random negative, ties
// credited one half. Computed from mid-ranks in O(n log n).
inline double auc_roc(const std::vector<ScoredPair>& pairs) {
  std::size_t positives = 0;
  for (const auto& p : pairs) positives += p.label ? 1 : 0;
  const std::size_t negatives = pairs.size() - positives;
  if (positives == 0 || negatives == 0) throw ContractError("auc_roc: needs both positive and negative pairs");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pairs[a].score < pairs[b].score; });
  // Sum over positives of (#negatives strictly below + 0.5 * #negatives tied).
  double credit = 0.0;
  std::size_t negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    std::size_t neg_in_group = 0;
    while (j < order.size() && pairs[order[j]].score == pairs[order[i]].score) {
      (pairs[order[j]].label ? pos_in_group : neg_in_group) += 1;
      ++j;
    }
    credit += static_cast<double>(pos_in_group) *
              (static_cast<double>(negatives_below) + 0.5 * static_cast<double>(neg_in_group));
    negatives_below += neg_in_group;
    i = j;
  }
  return credit / (static_cast<double>(positives) * static_cast<double>(negatives));
}

struct EvalResult {
  double ap = 0.0;
  double auc = 0.0;
  std::size_t positives = 0;
};

}  // namespace tfwf
