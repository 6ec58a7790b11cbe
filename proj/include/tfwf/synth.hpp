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

// Planted-periodicity event streams.
//
// Nodes [0, n/2) form the left side and [n/2, n) the right side. Each
// planted pair (left, right) fires every `period` time units, the period
// drawn per pair from {short, long}. Noise events connect a uniform left node
// to a uniform right node at a uniform time in [0, horizon].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "tfwf/errors.hpp"
#include "tfwf/temporal_graph.hpp"

namespace tfwf {

struct SyntheticSpec {
  std::size_t num_nodes = 50;
  std::size_t num_events = 2000;   // total; 0 means "every planted event up to horizon"
  double short_period = 5.0;
  double long_period = 40.0;
  double noise = 0.2;
  std::uint64_t seed = 42;
  std::size_t num_pairs = 0;       // 0: one pair per left node
  double horizon = 0.0;            // required when num_events == 0
  bool random_phase = true;        // offset each pair's first firing by U{0..period-1}

  void validate() const {
    if (num_nodes < 2) throw ConfigError("synthetic generator needs at least two nodes");
    if (!(short_period > 0) || !(long_period > 0)) throw ConfigError("synthetic periods must be positive");
    if (noise < 0 || noise > 1) throw ConfigError("synthetic noise rate must lie in [0, 1]");
    if (num_events == 0 && !(horizon > 0)) throw ConfigError("synthetic generator needs num_events or a horizon");
    if (num_events > 0 && noise >= 1) throw ConfigError("noise rate 1 leaves no planted events");
    const std::size_t left = num_nodes / 2;
    const std::size_t right = num_nodes - left;
    if (num_pairs > left * right) throw ConfigError("more planted pairs than left-right node pairs");
  }
};

struct PlantedPair {
  NodeId u = 0;
  NodeId v = 0;
  double period = 0.0;
  double phase = 0.0;
};

struct SyntheticData {
  EventStore store;
  std::vector<PlantedPair> pairs;
  double horizon = 0.0;
};

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t left = spec.num_nodes / 2;
  const std::size_t right = spec.num_nodes - left;
  const std::size_t num_pairs = spec.num_pairs ? spec.num_pairs : left;

  // Pair assignment: a random matching first, then random distinct extras.
  std::vector<NodeId> rights(right);
  std::iota(rights.begin(), rights.end(), static_cast<NodeId>(left));
  std::shuffle(rights.begin(), rights.end(), rng);
  std::vector<PlantedPair> pairs;
  std::vector<std::pair<NodeId, NodeId>> used;
  for (std::size_t i = 0; i < std::min({num_pairs, left, right}); ++i) {
    pairs.push_back({i, rights[i], 0.0, 0.0});
    used.emplace_back(i, rights[i]);
  }
  std::uniform_int_distribution<std::size_t> pick_left(0, left - 1);
  std::uniform_int_distribution<std::size_t> pick_right(left, spec.num_nodes - 1);
  while (pairs.size() < num_pairs) {
    const std::pair<NodeId, NodeId> p{pick_left(rng), pick_right(rng)};
    if (std::find(used.begin(), used.end(), p) != used.end()) continue;
    used.push_back(p);
    pairs.push_back({p.first, p.second, 0.0, 0.0});
  }
  std::bernoulli_distribution coin(0.5);
  for (auto& p : pairs) {
    p.period = coin(rng) ? spec.short_period : spec.long_period;
    if (spec.random_phase) {
      const auto steps = static_cast<std::size_t>(std::max(1.0, std::floor(p.period)));
      p.phase = static_cast<double>(std::uniform_int_distribution<std::size_t>(0, steps - 1)(rng));
    }
  }

  // (ts, pair index) for planted firings at phase + k * period, k >= 1.
  const auto planted_until = [&](double limit) {
    std::vector<std::pair<double, std::size_t>> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (std::size_t k = 1;; ++k) {
        const double ts = pairs[i].phase + static_cast<double>(k) * pairs[i].period;
        if (ts > limit) break;
        out.emplace_back(ts, i);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  std::size_t planted_target = 0;
  double horizon = spec.horizon;
  std::vector<std::pair<double, std::size_t>> planted;
  if (spec.num_events == 0) {
    planted = planted_until(horizon);
    planted_target = planted.size();
  } else {
    planted_target = static_cast<std::size_t>(std::llround((1.0 - spec.noise) * static_cast<double>(spec.num_events)));
    double rate = 0.0;
    for (const auto& p : pairs) rate += 1.0 / p.period;
    double limit = static_cast<double>(planted_target) / rate + std::max(spec.short_period, spec.long_period) * 2;
    planted = planted_until(limit);
    while (planted.size() < planted_target) {
      limit *= 2;
      planted = planted_until(limit);
    }
    planted.resize(planted_target);
    horizon = planted_target ? planted.back().first : std::max(spec.short_period, spec.long_period);
  }

  const std::size_t noise_count =
      spec.num_events == 0
          ? static_cast<std::size_t>(std::llround(spec.noise >= 1 ? 0.0
                                                                   : spec.noise / (1.0 - spec.noise) *
                                                                         static_cast<double>(planted_target)))
          : spec.num_events - planted_target;

  // (ts, origin, src, dst) with origin 0 = planted, 1 = noise; sorting on
  // the tuple keeps planted events ahead of noise at equal timestamps.
  std::vector<std::tuple<double, int, std::size_t, NodeId, NodeId>> rows;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    const auto& p = pairs[planted[i].second];
    rows.emplace_back(planted[i].first, 0, i, p.u, p.v);
  }
  std::uniform_real_distribution<double> when(0.0, horizon);
  for (std::size_t i = 0; i < noise_count; ++i) {
    const double ts = when(rng);
    const NodeId u = pick_left(rng);
    const NodeId v = pick_right(rng);
    rows.emplace_back(ts, 1, i, u, v);
  }
  std::sort(rows.begin(), rows.end());

  std::vector<TemporalEvent> events;
  events.reserve(rows.size());
  for (const auto& [ts, origin, seq, u, v] : rows) {
    TemporalEvent e;
    e.src = u;
    e.dst = v;
    e.ts = ts;
    e.idx = events.size();
    events.push_back(std::move(e));
  }
  return {EventStore::with_dense_ids(std::move(events), spec.num_nodes), std::move(pairs), horizon};
}

}  // namespace tfwf
