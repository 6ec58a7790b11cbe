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

// store -> split -> train -> evaluate, as used by the CLI and the
// acceptance checks.

#include <string>

#include "tfwf/checkpoint.hpp"
#include "tfwf/config.hpp"
#include "tfwf/training.hpp"

namespace tfwf {

struct RunOutputs {
  TrainResult train;
  EvalResult test;
  Checkpoint checkpoint;
  std::string metric_log;
  std::string results_row;
};

inline AdamOptions adam_options(const TrainConfig& tc) { return {tc.lr, tc.beta1, tc.beta2, tc.eps}; }

// Keeps the first `max_events` events (0 keeps all).
inline EventStore truncate_events(const EventStore& store, std::size_t max_events) {
  if (max_events == 0 || max_events >= store.num_events()) return store;
  std::vector<std::size_t> keep(max_events);
  for (std::size_t i = 0; i < max_events; ++i) keep[i] = i;
  return store.subset(keep);
}

inline RunOutputs run_pipeline(const EventStore& store, const RunConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  const auto data = prepare_data(store, cfg);
  TFWaveFormer<float> model(cfg.model, store.edge_dim(), cfg.train.seed);
  Adam<float> optimizer(model.params(), adam_options(cfg.train));
  RunOutputs out;
  out.train = train(model, optimizer, data, cfg, hooks);
  out.test = evaluate(model, data, cfg.setting, cfg.strategy, test_seed(cfg.train.seed), cfg.train.batch_size);
  out.checkpoint = make_checkpoint(model, cfg, &optimizer, &model.rng());
  out.metric_log = metric_log_text(cfg, out.train.log);
  out.results_row = results_row(cfg, cfg.setting, cfg.strategy, out.test);
  return out;
}

}  // namespace tfwf
