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

// Training loop and evaluation drivers.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tfwf/config.hpp"
#include "tfwf/metrics.hpp"
#include "tfwf/model.hpp"
#include "tfwf/optimizer.hpp"
#include "tfwf/sampler.hpp"
#include "tfwf/temporal_graph.hpp"

namespace tfwf {

// Split bookkeeping shared by training and evaluation.
struct PreparedData {
  const EventStore* full = nullptr;
  SplitSpec split;
  Partition part;
  EventStore train_store;                // train-partition events only
  std::vector<NodeId> train_candidates;  // nodes usable as training negatives

  const std::vector<std::size_t>& val_events(Setting s) const {
    return s == Setting::kInductive ? part.inductive_val : part.val;
  }
  const std::vector<std::size_t>& test_events(Setting s) const {
    return s == Setting::kInductive ? part.inductive_test : part.test;
  }
};

inline PreparedData prepare_data(const EventStore& store, const RunConfig& cfg) {
  PreparedData d;
  d.full = &store;
  const double inductive = cfg.setting == Setting::kInductive ? cfg.inductive_fraction : 0.0;
  d.split = make_split(store, cfg.train_fraction, cfg.val_fraction, inductive, cfg.train.seed);
  d.part = partition(store, d.split);
  d.train_store = store.subset(d.part.train);
  for (NodeId n = 0; n < store.num_nodes(); ++n)
    if (!d.split.is_unseen(n)) d.train_candidates.push_back(n);
  return d;
}

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_ap = 0.0;
  double val_auc = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> log;
  std::size_t best_epoch = 0;  // 0: no epoch ran
  double best_val_ap = 0.0;
  bool early_stopped = false;
};

// Scores every event in `ordinals` (chronological) against one sampled
// negative each. Features come from `store` with neighbors strictly before
// each event's timestamp.
template <typename T>
std::vector<ScoredPair> score_events(const TFWaveFormer<T>& model, const EventStore& store,
                                     const std::vector<std::size_t>& ordinals, NegativeSampler& sampler,
                                     std::size_t batch_size) {
  NoGradGuard no_grad;
  std::vector<ScoredPair> out;
  out.reserve(2 * ordinals.size());
  for (std::size_t begin = 0; begin < ordinals.size(); begin += batch_size) {
    const std::size_t end = std::min(ordinals.size(), begin + batch_size);
    std::vector<TemporalEvent> positives;
    for (std::size_t i = begin; i < end; ++i) positives.push_back(store.event(ordinals[i]));
    const auto negatives = sampler.sample_batch(positives);
    PairBatch pb;
    for (const auto& e : positives) append_pair(pb, e.src, e.dst, e.ts, true);
    for (std::size_t i = 0; i < positives.size(); ++i)
      append_pair(pb, negatives[i].first, negatives[i].second, positives[i].ts, false);
    const auto fb = build_features(store, pb.queries, model.config().seq_len, model.config().nif_include_self);
    const auto pooled = model.forward(fb).pooled;
    const auto scores = model.score(pooled, pb.src_rows, pb.dst_rows);
    const std::size_t n = positives.size();
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const auto& q = pb.queries[pb.src_rows[i]];
      out.push_back({static_cast<double>(scores[i]), pb.labels[i] != 0, q.node, q.partner, q.t});
    }
  }
  return out;
}

// Chronological evaluation of `ordinals` under `strategy` with a sampler
// freshly seeded from `seed`, so repeated calls return identical metrics.
template <typename T>
EvalResult evaluate_events(const TFWaveFormer<T>& model, const PreparedData& data,
                           const std::vector<std::size_t>& ordinals, Strategy strategy, std::uint64_t seed,
                           std::size_t batch_size) {
  if (ordinals.empty()) throw ContractError("evaluate: empty evaluation set");
  NegativeSampler sampler(*data.full, strategy, seed, {}, data.split.train_end_ts);
  const auto pairs = score_events(model, *data.full, ordinals, sampler, batch_size);
  EvalResult r;
  r.ap = average_precision(pairs);
  r.auc = auc_roc(pairs);
  r.positives = ordinals.size();
  return r;
}

// Test-partition evaluation; in the inductive setting only events touching
// an unseen node are scored.
template <typename T>
EvalResult evaluate(const TFWaveFormer<T>& model, const PreparedData& data, Setting setting, Strategy strategy,
                    std::uint64_t seed, std::size_t batch_size = 50) {
  return evaluate_events(model, data, data.test_events(setting), strategy, seed, batch_size);
}

namespace detail {

template <typename T>
std::string parameter_norms(const ParameterStore<T>& params) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (const auto& p : params.all()) {
    double sq = 0.0;
    for (auto x : p.value.data()) sq += static_cast<double>(x) * static_cast<double>(x);
    os << "  " << p.name << ": " << std::sqrt(sq) << '\n';
  }
  return os.str();
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t negative_seed(std::uint64_t seed) { return detail::mix_seed(seed, 1); }
inline std::uint64_t validation_seed(std::uint64_t seed) { return detail::mix_seed(seed, 2); }
inline std::uint64_t test_seed(std::uint64_t seed) { return detail::mix_seed(seed, 3); }

struct TrainHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  // Called with the ordinal range [first, last] (into the training store)
  // of each batch before its features are built.
  std::function<void(std::size_t, std::size_t)> on_batch;
};

// Mini-batch training with one random negative per positive. Leaves the
// model holding the parameters of the best validation epoch.
template <typename T>
TrainResult train(TFWaveFormer<T>& model, Adam<T>& optimizer, const PreparedData& data, const RunConfig& cfg,
                  const TrainHooks& hooks = {}) {
  TrainResult result;
  if (cfg.train.epochs == 0) return result;
  const auto& train_events = data.train_store.events();
  if (train_events.empty()) throw ContractError("train: training partition is empty");
  const auto& val = data.val_events(cfg.setting);

  NegativeSampler negatives(data.train_store, Strategy::kRandom, negative_seed(cfg.train.seed), data.train_candidates);
  auto& params = model.params();
  std::vector<std::vector<T>> best;
  double best_ap = -1.0;
  std::size_t since_best = 0;
  const std::size_t L = model.config().seq_len;
  const bool include_self = model.config().nif_include_self;

  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    std::size_t loss_items = 0;
    for (std::size_t begin = 0; begin < train_events.size(); begin += cfg.train.batch_size) {
      const std::size_t end = std::min(train_events.size(), begin + cfg.train.batch_size);
      if (hooks.on_batch) hooks.on_batch(begin, end - 1);
      const std::vector<TemporalEvent> positives(train_events.begin() + begin, train_events.begin() + end);
      const auto sampled = negatives.sample_batch(positives);
      PairBatch pb;
      for (const auto& e : positives) append_pair(pb, e.src, e.dst, e.ts, true);
      for (std::size_t i = 0; i < positives.size(); ++i)
        append_pair(pb, sampled[i].first, sampled[i].second, positives[i].ts, false);
      const auto fb = build_features(data.train_store, pb.queries, L, include_self);

      const auto fwd = model.forward(fb, &model.rng());
      const auto scores = model.score(fwd.pooled, pb.src_rows, pb.dst_rows);
      const auto link = link_loss(scores, pb.labels);
      const auto loss = add(link, model.penalty());
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value)) {
        throw DivergenceError("loss became " + std::to_string(value) + " at epoch " + std::to_string(epoch) +
                              ", batch starting at event " + std::to_string(begin) + "; parameter norms:\n" +
                              detail::parameter_norms(params));
      }
      params.zero_grad();
      backward(loss);
      optimizer.step();
      loss_sum += static_cast<double>(link.item()) * static_cast<double>(pb.labels.size());
      loss_items += pb.labels.size();
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(loss_items);
    if (!val.empty()) {
      const auto r = evaluate_events(model, data, val, Strategy::kRandom, validation_seed(cfg.train.seed),
                                     cfg.train.batch_size);
      m.val_ap = r.ap;
      m.val_auc = r.auc;
    }
    if (cfg.train.record_wall_time) {
      m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.log.push_back(m);
    if (hooks.on_epoch) hooks.on_epoch(m);

    if (m.val_ap > best_ap) {
      best_ap = m.val_ap;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : params.all()) best.emplace_back(p.value.data().begin(), p.value.data().end());
      since_best = 0;
    } else if (++since_best >= cfg.train.patience && cfg.train.patience > 0) {
      result.early_stopped = true;
      break;
    }
  }
  result.best_val_ap = best_ap;
  auto& all = params.all();
  for (std::size_t k = 0; k < all.size(); ++k) std::copy(best[k].begin(), best[k].end(), all[k].value.mutable_data().begin());
  params.zero_grad();
  return result;
}

// ---------------------------------------------------------------------------
// CSV outputs.

inline std::string format_metric(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

inline std::string metric_log_text(const RunConfig& cfg, const std::vector<EpochMetrics>& log) {
  std::ostringstream os;
  std::istringstream config(cfg.to_text());
  for (std::string line; std::getline(config, line);) os << "# " << line << '\n';
  os << "epoch,train_loss,val_ap,val_auc,seconds\n";
  for (const auto& m : log) {
    os << m.epoch << ',' << format_metric(m.train_loss) << ',' << format_metric(m.val_ap) << ','
       << format_metric(m.val_auc) << ',' << format_metric(m.seconds) << '\n';
  }
  return os.str();
}

inline std::string results_header() { return "dataset,setting,strategy,ap,auc,seed\n"; }

inline std::string results_row(const RunConfig& cfg, Setting setting, Strategy strategy, const EvalResult& r) {
  std::ostringstream os;
  os << cfg.dataset_name << ',' << to_string(setting) << ',' << to_string(strategy) << ',' << format_metric(r.ap)
     << ',' << format_metric(r.auc) << ',' << cfg.train.seed << '\n';
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FormatError("write failed for '" + path + "'");
}

}  // namespace tfwf
