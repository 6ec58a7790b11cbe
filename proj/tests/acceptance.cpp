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

// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status 0
// iff every selected check passed, 77 when the only selected check was
// skipped for lack of data.
//
//   tfwf_acceptance [--only NAME]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "tfwf/tfwf.hpp"

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Check {
  std::string name;
  std::string criterion;
  std::function<Outcome(std::ostream&)> run;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome verdict(bool ok) { return ok ? Outcome::kPass : Outcome::kFail; }

template <typename T>
tfwf::Tensor<T> random_tensor(const tfwf::Shape& shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return tfwf::Tensor<T>::from_data(shape, std::move(v));
}

// ---------------------------------------------------------------------------

Outcome check_gradients(std::ostream& os) {
  const auto start = Clock::now();
  const auto report = tfwf::model_gradcheck(tfwf::gradcheck_config());
  const double secs = seconds_since(start);
  tfwf::print_report(report, os);
  os << "  runtime " << secs << " s\n";
  return verdict(report.passed() && report.groups.size() >= 12 && secs < 60.0);
}

Outcome check_convolution(std::ostream& os) {
  std::mt19937_64 rng(2026);
  double worst = 0;
  bool odd = false, even = false;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng() % 16, d = 1 + rng() % 8;
    std::size_t k = 1 + trial % 6;
    while (k > 2 * len) --k;
    (k % 2 ? odd : even) = true;
    const auto x = random_tensor<double>({len, d}, rng);
    const auto kernel = random_tensor<double>({d, k}, rng);
    const auto pad = tfwf::conv_padding(k);
    const auto want = tfwf::oracle::naive_conv(x, kernel, pad.left, pad.right);
    const auto got = tfwf::depthwise_conv(x, kernel);
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  os << "  max abs error " << worst << " (odd k covered: " << odd << ", even k covered: " << even << ")\n";
  return verdict(worst <= 1e-6 && odd && even);
}

Outcome check_scale_fusion(std::ostream& os) {
  std::mt19937_64 rng(7);
  const std::size_t m = 4, d = 6, len = 5;
  tfwf::ParameterStore<double> ps;
  tfwf::ScaleAttention<double> attn(ps, m, d, 1.0);
  std::vector<tfwf::Tensor<double>> zs;
  for (std::size_t k = 0; k < m; ++k) zs.push_back(random_tensor<double>({len, d}, rng));

  // Equal weights (the zero init) give the plain mean.
  double mean_err = 0;
  {
    const auto z = tfwf::scale_fuse(zs, attn);
    for (std::size_t i = 0; i < len * d; ++i) {
      double mean = 0;
      for (const auto& zk : zs) mean += zk[i] / m;
      mean_err = std::max(mean_err, std::abs(z[i] - mean));
    }
  }

  // Column sums of S over random weights and temperatures.
  double sum_err = 0;
  auto w = attn.weights();
  for (int trial = 0; trial < 20; ++trial) {
    for (auto& v : w.mutable_data()) v = std::uniform_real_distribution<double>(-5, 5)(rng);
    attn.set_temperature(std::pow(10.0, std::uniform_real_distribution<double>(-2, 1)(rng)));
    const auto s = attn.scale_softmax();
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0;
      for (std::size_t k = 0; k < m; ++k) acc += s[k * d + i];
      sum_err = std::max(sum_err, std::abs(acc - 1.0));
    }
  }

  // tau = 1e-6 against hard argmax selection, with per-channel weight gaps >= 0.05.
  double argmax_err = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> vals(m * d);
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<std::size_t> order(m);
      for (std::size_t k = 0; k < m; ++k) order[k] = k;
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t k = 0; k < m; ++k) vals[order[k] * d + i] = 0.05 * static_cast<double>(k) + 0.01 * i;
    }
    std::copy(vals.begin(), vals.end(), w.mutable_data().begin());
    attn.set_temperature(1e-6);
    const auto z = tfwf::scale_fuse(zs, attn);
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < m; ++k)
        if (vals[k * d + i] > vals[best * d + i]) best = k;
      for (std::size_t t = 0; t < len; ++t)
        argmax_err = std::max(argmax_err, std::abs(z[t * d + i] - zs[best][t * d + i]));
    }
  }
  os << "  max |sum_k S_k - 1| " << sum_err << ", argmax error " << argmax_err << ", mean error " << mean_err
     << '\n';
  return verdict(sum_err <= 1e-12 && argmax_err <= 1e-3 && mean_err <= 1e-6);
}

Outcome check_positional_encoding(std::ostream& os) {
  const std::size_t len = 128, d = 64;
  const auto pe = tfwf::positional_table<float>(len, d);
  double worst = 0;
  for (std::size_t pos = 0; pos < len; ++pos)
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t i = c / 2;
      const double angle = static_cast<double>(pos) / std::pow(10000.0, 2.0 * i / static_cast<double>(d));
      const double want = c % 2 == 0 ? std::sin(angle) : std::cos(angle);
      worst = std::max(worst, std::abs(static_cast<double>(pe[pos * d + c]) - want));
    }
  os << "  max abs error " << worst << '\n';
  return verdict(worst <= 1e-7);
}

Outcome check_attention(std::ostream& os) {
  std::mt19937_64 rng(31);
  const std::size_t batch = 4, len = 8, d = 16, heads = 4;
  tfwf::ParameterStore<double> ps;
  tfwf::Rng init(5);
  tfwf::MultiHeadSelfAttention<double> mhsa(ps, "attn", d, heads, init);
  auto z = random_tensor<double>({batch, len, d}, rng, -2, 2);
  std::vector<std::uint8_t> valid(batch * len);
  for (auto& v : valid) v = rng() % 4 != 0;
  valid[0] = 1;
  const auto mask = tfwf::make_attention_mask<double>(valid, batch, len);

  double row_err = 0;
  for (std::size_t h = 0; h < heads; ++h) {
    const auto w = mhsa.weights(z, mask, h);
    for (std::size_t b = 0; b < batch; ++b) {
      bool any = false;
      for (std::size_t k = 0; k < len; ++k) any = any || valid[b * len + k];
      for (std::size_t q = 0; q < len; ++q) {
        double acc = 0;
        for (std::size_t k = 0; k < len; ++k) {
          const double v = w[(b * len + q) * len + k];
          if (v < 0 || (!valid[b * len + k] && v != 0)) row_err = std::numeric_limits<double>::infinity();
          acc += v;
        }
        row_err = std::max(row_err, std::abs(acc - (any ? 1.0 : 0.0)));
      }
    }
  }

  double pad_err = 0;
  {
    const auto before = mhsa(z, mask);
    for (std::size_t r = 0; r < batch * len; ++r)
      if (!valid[r])
        for (std::size_t c = 0; c < d; ++c) z.mutable_data()[r * d + c] = std::normal_distribution<double>(0, 10)(rng);
    const auto after = mhsa(z, mask);
    for (std::size_t r = 0; r < batch * len; ++r)
      if (valid[r])
        for (std::size_t c = 0; c < d; ++c) pad_err = std::max(pad_err, std::abs(after[r * d + c] - before[r * d + c]));
  }

  // Full stack without positions: permuting slots permutes outputs.
  double perm_err = 0;
  {
    tfwf::ParameterStore<double> sps;
    tfwf::Rng srng(6);
    tfwf::TransformerDims dims{len, d, heads, 2, 4 * d, 0.0};
    tfwf::HybridTransformer<double> stack(sps, dims, srng);
    const auto x = random_tensor<double>({1, len, d}, rng);
    const auto g = random_tensor<double>({1, len, d}, rng);
    std::vector<std::size_t> perm(len);
    for (std::size_t i = 0; i < len; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto permute = [&](const tfwf::Tensor<double>& t) {
      return tfwf::reshape(tfwf::gather_rows(tfwf::reshape(t, {len, d}), perm), {1, len, d});
    };
    const auto all = tfwf::make_attention_mask<double>(std::vector<std::uint8_t>(len, 1), 1, len);
    const auto run = [&](const tfwf::Tensor<double>& a, const tfwf::Tensor<double>& b) {
      return stack.stack(stack.fuse_streams(stack.compress(a), b, false), all);
    };
    const auto y = run(x, g);
    const auto yp = run(permute(x), permute(g));
    for (std::size_t r = 0; r < len; ++r)
      for (std::size_t c = 0; c < d; ++c) perm_err = std::max(perm_err, std::abs(yp[r * d + c] - y[perm[r] * d + c]));
  }
  os << "  row-sum error " << row_err << ", padding error " << pad_err << ", permutation error " << perm_err
     << '\n';
  return verdict(row_err <= 1e-6 && pad_err <= 1e-6 && perm_err <= 1e-5);
}

std::vector<tfwf::ScoredPair> random_instance(std::mt19937_64& rng, std::size_t n, int levels) {
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<tfwf::ScoredPair> out(n);
  for (auto& p : out) {
    p.score = levels > 0 ? static_cast<double>(rng() % levels) * 0.5 : u(rng);
    p.label = rng() % 2;
  }
  const std::size_t pos = rng() % n;
  const std::size_t neg = (pos + 1 + rng() % (n - 1)) % n;
  out[pos].label = true;
  out[neg].label = false;
  return out;
}

Outcome check_metrics(std::ostream& os) {
  std::mt19937_64 rng(99);
  double ap_err = 0, auc_err = 0, mono_err = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 99;
    const int levels = trial % 2 == 0 ? 1 + static_cast<int>(rng() % 5) : 0;  // tie-heavy on even trials
    const auto pairs = random_instance(rng, n, levels);
    const double ap = tfwf::average_precision(pairs);
    const double auc = tfwf::auc_roc(pairs);
    ap_err = std::max(ap_err, std::abs(ap - tfwf::oracle::average_precision(pairs)));
    auc_err = std::max(auc_err, std::abs(auc - tfwf::oracle::auc_trapezoid(pairs)));
    for (int which = 0; which < 3; ++which) {
      auto moved = pairs;
      for (auto& p : moved) {
        p.score = which == 0 ? 3 * p.score - 2 : which == 1 ? std::exp(p.score) : std::atan(p.score);
      }
      mono_err = std::max(mono_err, std::abs(tfwf::average_precision(moved) - ap));
      mono_err = std::max(mono_err, std::abs(tfwf::auc_roc(moved) - auc));
    }
  }
  os << "  AP oracle error " << ap_err << ", AUC oracle error " << auc_err << ", monotone-transform error "
     << mono_err << '\n';
  return verdict(ap_err <= 1e-10 && auc_err <= 1e-10 && mono_err <= 1e-12);
}

Outcome check_score_symmetry(std::ostream& os) {
  // Model-level: embeddings of a real batch, pairs scored both ways.
  const auto store = tfwf::gradcheck_store(17, 12, 80);
  tfwf::ModelConfig mc;
  mc.seq_len = 8;
  mc.dim = 16;
  tfwf::TFWaveFormer<float> model(mc, store.edge_dim(), 3);
  std::vector<tfwf::Query> queries;
  for (std::size_t i = store.num_events() - 10; i < store.num_events(); ++i) {
    const auto& e = store.event(i);
    queries.push_back({e.src, e.dst, e.ts});
  }
  const auto pooled = model.embed(tfwf::build_features(store, queries, mc.seq_len, mc.nif_include_self));
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (std::size_t j = 0; j < queries.size(); ++j) {
      a.push_back(i);
      b.push_back(j);
    }
  const auto s_ab = model.score(pooled, a, b);
  const auto s_ba = model.score(pooled, b, a);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < s_ab.size(); ++i) mismatches += s_ab[i] != s_ba[i];
  os << "  " << s_ab.size() << " ordered pairs, " << mismatches << " not bit-identical\n";
  return verdict(mismatches == 0);
}

Outcome check_loss_sanity(std::ostream& os) {
  using TD = tfwf::Tensor<double>;
  double zero_err = 0;
  for (std::uint8_t y : {0, 1}) {
    const double l = tfwf::link_loss(TD::from_data({1}, {0.0}), {y}).item();
    zero_err = std::max(zero_err, std::abs(l - std::log(2.0)));
  }
  bool finite = true;
  double worst = 0;
  const auto probe = [&](auto zero) {
    using T = decltype(zero);
    for (T s : {T(500), T(-500)})
      for (std::uint8_t y : {0, 1}) {
        auto t = tfwf::Tensor<T>::from_data({1}, {s}, true);
        auto l = tfwf::link_loss(t, {y});
        tfwf::backward(l);
        const double v = static_cast<double>(l.item()), g = static_cast<double>(t.grad()[0]);
        finite = finite && std::isfinite(v) && std::isfinite(g);
        worst = std::max(worst, v);
      }
  };
  probe(0.0);
  probe(0.0f);
  os << "  |loss(0) - ln 2| " << zero_err << ", largest loss at |s| = 500: " << worst << '\n';
  return verdict(zero_err <= 1e-9 && finite);
}

// ---------------------------------------------------------------------------
// Training-based checks on the planted-periodicity dataset.

tfwf::EventStore synthetic_store() {
  tfwf::SyntheticSpec spec;  // 2,000 events, 50 nodes, periods {5, 40}, noise 0.2, seed 42
  return tfwf::generate_synthetic(spec).store;
}

tfwf::RunConfig synthetic_config(std::uint64_t seed) {
  tfwf::RunConfig cfg;
  cfg.dataset_name = "synthetic";
  cfg.train.epochs = 20;
  cfg.train.seed = seed;
  return cfg;
}

tfwf::TrainHooks epoch_printer(std::ostream& os, const std::string& tag) {
  tfwf::TrainHooks hooks;
  hooks.on_epoch = [&os, tag](const tfwf::EpochMetrics& m) {
    os << "  [" << tag << "] epoch " << std::setw(2) << m.epoch << "  loss " << std::fixed << std::setprecision(4)
       << m.train_loss << "  val AP " << m.val_ap << "  val AUC " << m.val_auc << std::defaultfloat << std::endl;
  };
  return hooks;
}

Outcome check_learning_signal(std::ostream& os) {
  const auto store = synthetic_store();
  const auto cfg = synthetic_config(42);
  cfg.validate();

  const auto data = tfwf::prepare_data(store, cfg);
  tfwf::TFWaveFormer<float> untrained(cfg.model, store.edge_dim(), cfg.train.seed);
  const auto base = tfwf::evaluate_events(untrained, data, data.val_events(cfg.setting), tfwf::Strategy::kRandom,
                                          tfwf::validation_seed(cfg.train.seed), cfg.train.batch_size);
  os << "  random-init val AP " << base.ap << " (AUC " << base.auc << ")\n";

  const auto start = Clock::now();
  const auto out = tfwf::run_pipeline(store, cfg, epoch_printer(os, "default"));
  const double secs = seconds_since(start);
  double best = 0;
  for (const auto& m : out.train.log) best = std::max(best, m.val_ap);
  os << "  best val AP " << best << " at epoch " << out.train.best_epoch << " of " << out.train.log.size()
     << ", wall time " << secs << " s, test AP " << out.test.ap << '\n';
  return verdict(best >= 0.85 && secs < 600.0 && std::abs(base.ap - 0.5) <= 0.1);
}

double mean_test_ap(std::ostream& os, const tfwf::EventStore& store, const std::string& tag,
                    const std::function<void(tfwf::RunConfig&)>& edit) {
  double total = 0;
  for (std::uint64_t seed : {42u, 43u, 44u}) {
    auto cfg = synthetic_config(seed);
    edit(cfg);
    const auto out = tfwf::run_pipeline(store, cfg);
    os << "  [" << tag << "] seed " << seed << ": test AP " << out.test.ap << " (best val AP "
       << out.train.best_val_ap << ", " << out.train.log.size() << " epochs)" << std::endl;
    total += out.test.ap;
  }
  os << "  [" << tag << "] mean test AP " << total / 3 << std::endl;
  return total / 3;
}

Outcome check_ablation(std::ostream& os) {
  const auto store = synthetic_store();
  const double full = mean_test_ap(os, store, "default", [](tfwf::RunConfig&) {});
  const double no_freq = mean_test_ap(os, store, "disable-frequency", [](tfwf::RunConfig& c) {
    c.model.disable_frequency = true;
  });
  const double no_temp = mean_test_ap(os, store, "disable-temporal", [](tfwf::RunConfig& c) {
    c.model.disable_temporal = true;
  });
  return verdict(no_freq < full && no_temp < full);
}

Outcome check_multi_scale(std::ostream& os) {
  const auto store = synthetic_store();
  const double m1 = mean_test_ap(os, store, "m=1", [](tfwf::RunConfig& c) { c.model.scales = tfwf::default_scales(1); });
  const double m2 = mean_test_ap(os, store, "m=2", [](tfwf::RunConfig& c) { c.model.scales = tfwf::default_scales(2); });
  return verdict(m2 > m1);
}

Outcome check_determinism(std::ostream& os) {
  const auto store = synthetic_store();
  auto cfg = synthetic_config(42);
  cfg.train.epochs = 2;
  const auto a = tfwf::run_pipeline(store, cfg);
  const auto b = tfwf::run_pipeline(store, cfg);
  const auto ca = tfwf::serialize_checkpoint(a.checkpoint);
  const auto cb = tfwf::serialize_checkpoint(b.checkpoint);
  const bool same_ckpt = ca == cb;
  const bool same_log = a.metric_log == b.metric_log;
  const bool same_row = a.results_row == b.results_row;
  os << "  checkpoint " << ca.size() << " bytes identical: " << same_ckpt << ", metric log identical: " << same_log
     << ", results row identical: " << same_row << '\n';
  return verdict(same_ckpt && same_log && same_row);
}

Outcome check_uci(std::ostream& os) {
  const char* env = std::getenv("TFWF_UCI_PATH");
  const std::string path = env ? env : "data/uci.csv";
  if (!std::filesystem::exists(path)) {
    os << "  dataset not found at '" << path << "' (set TFWF_UCI_PATH)\n";
    return Outcome::kSkip;
  }
  const auto store = tfwf::ingest_csv(path);
  os << "  " << store.num_nodes() << " nodes, " << store.num_events() << " events\n";
  tfwf::RunConfig cfg;
  cfg.dataset_name = "uci";
  const auto start = Clock::now();
  const auto out = tfwf::run_pipeline(store, cfg, epoch_printer(os, "uci"));
  const double secs = seconds_since(start);
  os << "  test AP " << out.test.ap << " (AUC " << out.test.auc << "), wall time " << secs << " s\n";
  return verdict(out.test.ap >= 0.85 && secs < 7200.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TFWaveFormer acceptance checks"};
  std::string only;
  app.add_option("--only", only, "run a single check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Check> checks{
      {"gradients", "analytic vs central FD gradients, every group <= 1e-3, < 60 s", check_gradients},
      {"convolution", "depthwise conv vs naive oracle <= 1e-6 on 100 instances", check_convolution},
      {"scale_fusion", "sum S = 1 (1e-12), tau->1e-6 argmax (1e-3), equal weights mean (1e-6)", check_scale_fusion},
      {"positional_encoding", "sinusoidal table closed form <= 1e-7, L=128 d=64", check_positional_encoding},
      {"attention", "row-stochastic (1e-6), padding invariance (1e-6), permutation (1e-5)", check_attention},
      {"metrics", "AP/AUC oracles (1e-10), monotone invariance (1e-12)", check_metrics},
      {"score_symmetry", "score(u,v) == score(v,u) exactly", check_score_symmetry},
      {"loss_sanity", "loss(0) = ln 2 (1e-9), finite at |s| = 500", check_loss_sanity},
      {"learning_signal", "synthetic val AP >= 0.85 in 20 epochs, < 600 s; random init 0.5 +- 0.1",
       check_learning_signal},
      {"ablation", "3-seed mean AP: disable-frequency < default, disable-temporal < default", check_ablation},
      {"multi_scale", "3-seed mean AP(m=2) > AP(m=1)", check_multi_scale},
      {"determinism", "identical runs give byte-identical checkpoint and metric CSVs", check_determinism},
      {"uci", "UCI transductive random test AP >= 0.85, < 2 h", check_uci},
  };

  bool found = only.empty();
  bool failed = false;
  std::size_t skipped = 0, ran = 0;
  for (const auto& c : checks) {
    if (!only.empty() && c.name != only) continue;
    found = true;
    ++ran;
    std::cout << "== " << c.name << ": " << c.criterion << std::endl;
    Outcome outcome;
    try {
      outcome = c.run(std::cout);
    } catch (const std::exception& e) {
      std::cout << "  error: " << e.what() << '\n';
      outcome = Outcome::kFail;
    }
    const char* tag = outcome == Outcome::kPass ? "PASS" : outcome == Outcome::kFail ? "FAIL" : "SKIP";
    std::cout << tag << "  " << c.name << std::endl;
    failed = failed || outcome == Outcome::kFail;
    skipped += outcome == Outcome::kSkip;
  }
  if (!found) {
    std::cerr << "unknown check '" << only << "'\n";
    return 2;
  }
  if (failed) return 1;
  return ran > 0 && skipped == ran ? 77 : 0;
}
