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

// Central finite-difference checks of analytic gradients, grouped by
// parameter group.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tfwf/config.hpp"
#include "tfwf/model.hpp"
#include "tfwf/nn.hpp"
#include "tfwf/tensor.hpp"

namespace tfwf {

struct GroupCheck {
  std::string group;
  std::size_t entries = 0;
  double max_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradcheckReport {
  std::vector<GroupCheck> groups;
  double tolerance = 1e-3;

  bool passed() const {
    return std::all_of(groups.begin(), groups.end(), [&](const GroupCheck& g) { return g.max_error <= tolerance; });
  }
  std::vector<std::string> failing_groups() const {
    std::vector<std::string> out;
    for (const auto& g : groups)
      if (!(g.max_error <= tolerance)) out.push_back(g.group);
    return out;
  }
};

// Error measure: |analytic - numeric| / (1 + |numeric|).
inline double gradient_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (1.0 + std::abs(numeric));
}

// `loss` must rebuild the scalar loss from the current parameter values.
inline GradcheckReport gradcheck(ParameterStore<double>& params, const std::function<Tensor<double>()>& loss,
                                 double step = 1e-3, double tolerance = 1e-3) {
  params.zero_grad();
  auto l = loss();
  backward(l);
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params.all()) {
    if (p.value.has_grad()) {
      analytic.emplace_back(p.value.grad().begin(), p.value.grad().end());
    } else {
      analytic.emplace_back(p.value.size(), 0.0);
    }
  }
  std::map<std::string, GroupCheck> by_group;
  std::vector<std::string> order;
  NoGradGuard no_grad;
  auto& all = params.all();
  for (std::size_t k = 0; k < all.size(); ++k) {
    auto& p = all[k];
    if (!by_group.count(p.group)) {
      order.push_back(p.group);
      by_group[p.group].group = p.group;
    }
    auto& g = by_group[p.group];
    auto x = p.value.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + step;
      const double up = loss().item();
      x[i] = saved - step;
      const double down = loss().item();
      x[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = gradient_error(analytic[k][i], numeric);
      ++g.entries;
      if (err > g.max_error || std::isnan(err)) {
        g.max_error = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
        g.worst_parameter = p.name;
        g.worst_index = i;
        g.analytic = analytic[k][i];
        g.numeric = numeric;
      }
    }
  }
  params.zero_grad();
  GradcheckReport report;
  report.tolerance = tolerance;
  for (const auto& name : order) report.groups.push_back(by_group[name]);
  return report;
}

inline void print_report(const GradcheckReport& report, std::ostream& os) {
  os << std::left << std::setw(24) << "group" << std::right << std::setw(9) << "entries" << std::setw(14)
     << "max_rel_err" << "  status\n";
  for (const auto& g : report.groups) {
    os << std::left << std::setw(24) << g.group << std::right << std::setw(9) << g.entries << std::setw(14)
       << std::scientific << std::setprecision(3) << g.max_error << std::defaultfloat << "  "
       << (g.max_error <= report.tolerance ? "ok" : "FAIL");
    if (!(g.max_error <= report.tolerance)) {
      os << "  (" << g.worst_parameter << "[" << g.worst_index << "] analytic " << g.analytic << " numeric "
         << g.numeric << ")";
    }
    os << '\n';
  }
  os << (report.passed() ? "gradcheck passed" : "gradcheck FAILED") << " (" << report.groups.size()
     << " groups, tolerance " << report.tolerance << ")\n";
}

// Small event store with two edge features, used as the fixed input of the
// model-level check.
inline EventStore gradcheck_store(std::uint64_t seed, std::size_t nodes = 10, std::size_t events = 48) {
  Rng rng(seed);
  std::uniform_int_distribution<NodeId> node(0, nodes - 1);
  std::normal_distribution<float> feat(0.0f, 1.0f);
  std::vector<TemporalEvent> ev;
  double ts = 0.0;
  for (std::size_t i = 0; i < events; ++i) {
    TemporalEvent e;
    e.src = node(rng);
    do e.dst = node(rng);
    while (e.dst == e.src);
    ts += 1.0 + static_cast<double>(i % 3);
    e.ts = ts;
    e.edge_feat = {feat(rng), feat(rng)};
    e.idx = i;
    ev.push_back(std::move(e));
  }
  return EventStore::with_dense_ids(std::move(ev), nodes);
}

// Config of the model-level check: d = 8, L = 4, two heads, scales {1, 3},
// one layer.
inline ModelConfig gradcheck_config() {
  ModelConfig mc;
  mc.seq_len = 4;
  mc.dim = 8;
  mc.heads = 2;
  mc.layers = 1;
  mc.scales = {1, 3};
  mc.reg_lambda = 1e-2;
  return mc;
}

// Full loss (link loss + wavelet penalty) of a double-precision model on a
// fixed batch of positives and shifted-destination negatives.
inline GradcheckReport model_gradcheck(const ModelConfig& mc, std::uint64_t seed = 7, double step = 1e-3,
                                       double tolerance = 1e-3) {
  if (mc.dim > 16 || mc.seq_len > 8) throw ConfigError("gradcheck expects a small model (dim <= 16, seq_len <= 8)");
  const auto store = gradcheck_store(seed);
  TFWaveFormer<double> model(mc, store.edge_dim(), seed);
  // Perturb the zero-initialized groups so their gradients are generic.
  Rng rng(seed + 1);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  for (auto& p : model.params().all()) {
    if (p.group == "scale_weights" || p.group == "time_encoder" || p.name.find(".beta") != std::string::npos ||
        p.name.find(".bias") != std::string::npos || p.name == "score.b") {
      for (auto& x : p.value.mutable_data()) x += jitter(rng);
    }
  }
  PairBatch pb;
  const std::size_t n = store.num_events();
  for (std::size_t i = n - 4; i < n; ++i) {
    const auto& e = store.event(i);
    append_pair(pb, e.src, e.dst, e.ts, true);
    append_pair(pb, e.src, (e.dst + 1) % store.num_nodes(), e.ts, false);
  }
  const auto fb = build_features(store, pb.queries, mc.seq_len, mc.nif_include_self);
  const auto loss = [&] {
    const auto pooled = model.forward(fb).pooled;
    return add(link_loss(model.score(pooled, pb.src_rows, pb.dst_rows), pb.labels), model.penalty());
  };
  return gradcheck(model.params(), loss, step, tolerance);
}

}  // namespace tfwf
