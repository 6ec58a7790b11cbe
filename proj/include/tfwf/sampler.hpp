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

// Negative edge sampling: random destination, historical pairs and
// inductive (evaluation-only) pairs.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tfwf/temporal_graph.hpp"

namespace tfwf {

enum class Strategy { kRandom, kHistorical, kInductive };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "random";
    case Strategy::kHistorical: return "historical";
    case Strategy::kInductive: return "inductive";
  }
  return "random";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "random" || s == "rnd") return Strategy::kRandom;
  if (s == "historical" || s == "hist") return Strategy::kHistorical;
  if (s == "inductive" || s == "ind") return Strategy::kInductive;
  throw ConfigError("unknown negative sampling strategy '" + s + "'");
}

using NodePair = std::pair<NodeId, NodeId>;

class NegativeSampler {
 public:
  // `candidates`: destination pool for random draws (empty = every node).
  // `train_end_ts` separates training-period pairs from evaluation-period
  // pairs for the inductive strategy.
  NegativeSampler(const EventStore& store, Strategy strategy, std::uint64_t seed,
                  std::vector<NodeId> candidates = {}, double train_end_ts = 0.0)
      : strategy_(strategy), rng_(seed), candidates_(std::move(candidates)) {
    if (candidates_.empty()) {
      candidates_.resize(store.num_nodes());
      for (std::size_t i = 0; i < candidates_.size(); ++i) candidates_[i] = i;
    }
    std::sort(candidates_.begin(), candidates_.end());
    candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
    if (candidates_.empty()) throw ContractError("negative sampler: no candidate nodes");

    std::set<NodePair> seen;
    for (const auto& e : store.events()) {
      if (seen.insert({e.src, e.dst}).second) first_seen_.push_back({e.ts, {e.src, e.dst}});
    }
    // Events are chronological, so first_seen_ is sorted by ts.
    const auto it = std::upper_bound(first_seen_.begin(), first_seen_.end(), train_end_ts,
                                     [](double t, const FirstSeen& f) { return t < f.ts; });
    eval_begin_ = static_cast<std::size_t>(it - first_seen_.begin());
    for (std::size_t i = 0; i < first_seen_.size(); ++i) first_index_.emplace(key(first_seen_[i].pair), i);
  }

  Strategy strategy() const { return strategy_; }

  // One negative per positive. `positives` is a chronological batch; every
  // pool draw comes from pairs first observed strictly before its start.
  std::vector<NodePair> sample_batch(const std::vector<TemporalEvent>& positives) {
    std::vector<NodePair> out;
    out.reserve(positives.size());
    if (positives.empty()) return out;
    const double batch_start = positives.front().ts;
    std::set<NodePair> in_batch;
    for (const auto& p : positives) in_batch.insert({p.src, p.dst});
    for (const auto& p : positives) out.push_back(sample_one(p, batch_start, in_batch));
    return out;
  }

  NodePair sample_one(const TemporalEvent& positive, double batch_start, const std::set<NodePair>& in_batch) {
    if (strategy_ == Strategy::kRandom) return random_negative(positive);
    const auto hi = static_cast<std::size_t>(
        std::lower_bound(first_seen_.begin(), first_seen_.end(), batch_start,
                         [](const FirstSeen& f, double t) { return f.ts < t; }) -
        first_seen_.begin());
    const std::size_t lo = strategy_ == Strategy::kHistorical ? 0 : std::min(eval_begin_, hi);
    std::size_t excluded = 0;
    for (const auto& pair : in_batch) excluded += in_range(pair, lo, hi) ? 1 : 0;
    if (hi - lo <= excluded) return random_negative(positive);
    std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
    while (true) {
      const auto& candidate = first_seen_[pick(rng_)].pair;
      if (!in_batch.count(candidate)) return candidate;
    }
  }

  // Random strategy: keep the source, draw a destination != positive dst.
  NodePair random_negative(const TemporalEvent& positive) {
    const auto pos = std::lower_bound(candidates_.begin(), candidates_.end(), positive.dst);
    const bool contains_dst = pos != candidates_.end() && *pos == positive.dst;
    const std::size_t pool = candidates_.size() - (contains_dst ? 1 : 0);
    if (pool == 0) throw ContractError("negative sampler: destination pool is empty after excluding the positive");
    std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
    std::size_t idx = pick(rng_);
    if (contains_dst && idx >= static_cast<std::size_t>(pos - candidates_.begin())) ++idx;
    return {positive.src, candidates_[idx]};
  }

  // Eligible pool size at `batch_start` (before excluding batch positives).
  std::size_t pool_size(double batch_start) const {
    const auto hi = static_cast<std::size_t>(
        std::lower_bound(first_seen_.begin(), first_seen_.end(), batch_start,
                         [](const FirstSeen& f, double t) { return f.ts < t; }) -
        first_seen_.begin());
    if (strategy_ == Strategy::kRandom) return candidates_.size();
    const std::size_t lo = strategy_ == Strategy::kHistorical ? 0 : std::min(eval_begin_, hi);
    return hi - lo;
  }

  std::vector<NodePair> pool(double batch_start) const {
    std::vector<NodePair> out;
    const std::size_t size = pool_size(batch_start);
    const std::size_t lo = strategy_ == Strategy::kHistorical ? 0 : eval_begin_;
    for (std::size_t i = 0; i < size; ++i) out.push_back(first_seen_[lo + i].pair);
    return out;
  }

  const std::mt19937_64& rng() const { return rng_; }
  void set_rng(const std::mt19937_64& rng) { rng_ = rng; }

 private:
  struct FirstSeen {
    double ts;
    NodePair pair;
  };

  bool in_range(const NodePair& pair, std::size_t lo, std::size_t hi) const {
    const auto it = first_index_.find(key(pair));
    return it != first_index_.end() && it->second >= lo && it->second < hi;
  }
  static std::uint64_t key(const NodePair& p) {
    return (static_cast<std::uint64_t>(p.first) << 32) ^ static_cast<std::uint64_t>(p.second);
  }

  Strategy strategy_;
  std::mt19937_64 rng_;
  std::vector<NodeId> candidates_;
  std::vector<FirstSeen> first_seen_;
  std::size_t eval_begin_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> first_index_;
};

}  // namespace tfwf
