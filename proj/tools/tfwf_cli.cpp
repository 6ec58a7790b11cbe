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

// Command-line driver: synth, train, evaluate, gradcheck, sweep-m.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tfwf/tfwf.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kDiverged = 3 };

// Flags shared by train / evaluate / sweep-m. Each maps onto a config key,
// applied after the config file so the command line wins.
struct CommonFlags {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> setting;
  std::optional<std::string> strategy;
  bool disable_temporal = false;
  bool disable_frequency = false;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> m;
  std::optional<std::size_t> parallel;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key = value config file");
    cmd->add_option("--data", data, "event CSV (src,dst,ts[,label][,features...])");
    cmd->add_option("--out", out, "output path");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--setting", setting, "transductive | inductive");
    cmd->add_option("--strategy", strategy, "negative sampling: random | historical | inductive");
    cmd->add_flag("--disable-temporal", disable_temporal, "drop the temporal (MLP) stream");
    cmd->add_flag("--disable-frequency", disable_frequency, "drop the wavelet stream");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--m", m, "number of wavelet scales (kernel sizes 1,3,5,...)");
    cmd->add_option("--parallel", parallel, "worker threads for sweep-m");
  }

  tfwf::RunConfig resolve(tfwf::RunConfig base = {}) const {
    if (!config.empty()) base = tfwf::load_config_file(config, base);
    if (!data.empty()) base.data_path = data;
    if (!out.empty()) base.out_path = out;
    if (seed) base.set("seed", std::to_string(*seed));
    if (setting) base.set("setting", *setting);
    if (strategy) base.set("strategy", *strategy);
    if (disable_temporal) base.set("disable_temporal", "true");
    if (disable_frequency) base.set("disable_frequency", "true");
    if (epochs) base.set("epochs", std::to_string(*epochs));
    if (m) base.set("m", std::to_string(*m));
    if (parallel) base.set("parallel", std::to_string(*parallel));
    base.validate();
    return base;
  }
};

std::size_t thread_cap(std::size_t requested) {
  if (const char* env = std::getenv("TFWF_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) requested = std::min(requested, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(requested, 1);
}

tfwf::EventStore load_events(const tfwf::RunConfig& cfg) {
  if (cfg.data_path.empty()) throw tfwf::ConfigError("no data file given (--data or `data = PATH`)");
  return tfwf::truncate_events(tfwf::ingest_csv(cfg.data_path), cfg.max_events);
}

void fill_dataset_name(tfwf::RunConfig& cfg) {
  if (cfg.dataset_name == "dataset" && !cfg.data_path.empty()) cfg.dataset_name = fs::path(cfg.data_path).stem().string();
}

void print_epoch(const tfwf::EpochMetrics& m) {
  std::cout << "epoch " << m.epoch << "  loss " << tfwf::format_metric(m.train_loss) << "  val_ap "
            << tfwf::format_metric(m.val_ap) << "  val_auc " << tfwf::format_metric(m.val_auc) << std::endl;
}

int cmd_synth(const tfwf::SyntheticSpec& spec, const std::string& out) {
  if (out.empty()) throw tfwf::ConfigError("synth needs --out PATH");
  const auto data = tfwf::generate_synthetic(spec);
  tfwf::emit_csv(data.store, out);
  std::cout << "wrote " << data.store.num_events() << " events over " << data.store.num_nodes() << " nodes to "
            << out << '\n';
  return kOk;
}

int cmd_train(tfwf::RunConfig cfg) {
  fill_dataset_name(cfg);
  if (cfg.out_path.empty()) throw tfwf::ConfigError("train needs --out DIR");
  const auto store = load_events(cfg);
  fs::create_directories(cfg.out_path);
  tfwf::TrainHooks hooks;
  hooks.on_epoch = print_epoch;
  const auto run = tfwf::run_pipeline(store, cfg, hooks);
  const fs::path dir(cfg.out_path);
  tfwf::write_checkpoint(run.checkpoint, (dir / "model.ckpt").string());
  tfwf::write_text_file((dir / "metrics.csv").string(), run.metric_log);
  tfwf::write_text_file((dir / "results.csv").string(), tfwf::results_header() + run.results_row);
  std::cout << "test " << tfwf::to_string(cfg.setting) << "/" << tfwf::to_string(cfg.strategy) << "  ap "
            << tfwf::format_metric(run.test.ap) << "  auc " << tfwf::format_metric(run.test.auc) << '\n';
  return kOk;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& checkpoint_path) {
  if (checkpoint_path.empty()) throw tfwf::ConfigError("evaluate needs --checkpoint PATH");
  const auto ckpt = tfwf::read_checkpoint(checkpoint_path);
  auto cfg = flags.resolve(tfwf::config_from_checkpoint(ckpt));
  fill_dataset_name(cfg);
  const auto store = load_events(cfg);
  if (store.edge_dim() != tfwf::edge_dim_from_checkpoint(ckpt) &&
      !(store.edge_dim() == 0 && tfwf::edge_dim_from_checkpoint(ckpt) == 1)) {
    throw tfwf::LoadError("checkpoint was trained with " + std::to_string(tfwf::edge_dim_from_checkpoint(ckpt)) +
                          " edge features, data has " + std::to_string(store.edge_dim()));
  }
  tfwf::TFWaveFormer<float> model(cfg.model, store.edge_dim(), cfg.train.seed);
  tfwf::restore_checkpoint(ckpt, model);
  const auto data = tfwf::prepare_data(store, cfg);
  const auto r = tfwf::evaluate(model, data, cfg.setting, cfg.strategy, tfwf::test_seed(cfg.train.seed),
                                cfg.train.batch_size);
  const std::string text = tfwf::results_header() + tfwf::results_row(cfg, cfg.setting, cfg.strategy, r);
  if (!cfg.out_path.empty()) tfwf::write_text_file(cfg.out_path, text);
  std::cout << text;
  return kOk;
}

int cmd_gradcheck(const std::string& config_path, std::uint64_t seed) {
  tfwf::RunConfig cfg;
  cfg.model = tfwf::gradcheck_config();
  if (!config_path.empty()) cfg = tfwf::load_config_file(config_path, cfg);
  cfg.validate();
  const auto report = tfwf::model_gradcheck(cfg.model, seed);
  tfwf::print_report(report, std::cout);
  return report.passed() ? kOk : kFailure;
}

int cmd_sweep_m(tfwf::RunConfig cfg, std::vector<std::size_t> m_values, bool allow_large) {
  fill_dataset_name(cfg);
  if (m_values.empty()) throw tfwf::ConfigError("sweep-m needs at least one m value");
  for (auto m : m_values) {
    if (m == 0) throw tfwf::ConfigError("m values must be >= 1");
    if (m > 5 && !allow_large) throw tfwf::ConfigError("m = " + std::to_string(m) + " exceeds 5 (pass --allow-large-m)");
    auto probe = cfg;
    probe.model.scales = tfwf::default_scales(m);
    probe.validate();
  }
  const auto store = load_events(cfg);
  std::vector<tfwf::EvalResult> results(m_values.size());
  std::vector<std::string> errors(m_values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < m_values.size();) {
      try {
        auto run_cfg = cfg;
        run_cfg.model.scales = tfwf::default_scales(m_values[i]);
        results[i] = tfwf::run_pipeline(store, run_cfg).test;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t threads = std::min(thread_cap(cfg.parallel), m_values.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw std::runtime_error("m = " + std::to_string(m_values[i]) + ": " + errors[i]);
  }
  std::ostringstream os;
  os << "m,ap,auc\n";
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    os << m_values[i] << ',' << tfwf::format_metric(results[i].ap) << ',' << tfwf::format_metric(results[i].auc)
       << '\n';
  }
  if (!cfg.out_path.empty()) tfwf::write_text_file(cfg.out_path, os.str());
  std::cout << os.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic link prediction on timestamped event streams"};
  app.require_subcommand(1);

  tfwf::SyntheticSpec spec;
  std::string synth_out;
  bool fixed_phase = false;
  auto* synth = app.add_subcommand("synth", "generate a planted-periodicity event stream");
  synth->add_option("--out", synth_out, "output CSV")->required();
  synth->add_option("--seed", spec.seed, "random seed");
  synth->add_option("--nodes", spec.num_nodes, "node count");
  synth->add_option("--events", spec.num_events, "event count (0: all planted events up to --horizon)");
  synth->add_option("--short-period", spec.short_period, "short planted period");
  synth->add_option("--long-period", spec.long_period, "long planted period");
  synth->add_option("--noise", spec.noise, "fraction of noise events");
  synth->add_option("--pairs", spec.num_pairs, "planted pair count (0: one per left node)");
  synth->add_option("--horizon", spec.horizon, "time horizon when --events is 0");
  synth->add_flag("--fixed-phase", fixed_phase, "every pair first fires at ts = period");

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "train, write checkpoint + metric log, report test metrics");
  train_flags.attach(train);

  CommonFlags eval_flags;
  std::string checkpoint;
  auto* evaluate = app.add_subcommand("evaluate", "score the test partition with a saved checkpoint");
  eval_flags.attach(evaluate);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint written by train")->required();

  std::string gc_config;
  std::uint64_t gc_seed = 7;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every parameter group");
  gradcheck->add_option("--config", gc_config, "config overriding the small check model");
  gradcheck->add_option("--seed", gc_seed, "fixture seed");

  CommonFlags sweep_flags;
  std::vector<std::size_t> m_values{1, 2, 3, 4, 5};
  bool allow_large_m = false;
  auto* sweep = app.add_subcommand("sweep-m", "train one model per wavelet scale count");
  sweep_flags.attach(sweep);
  sweep->add_option("--m-values", m_values, "comma-separated m values")->delimiter(',');
  sweep->add_flag("--allow-large-m", allow_large_m, "permit m > 5");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      spec.random_phase = !fixed_phase;
      return cmd_synth(spec, synth_out);
    }
    if (train->parsed()) return cmd_train(train_flags.resolve());
    if (evaluate->parsed()) return cmd_evaluate(eval_flags, checkpoint);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_config, gc_seed);
    if (sweep->parsed()) return cmd_sweep_m(sweep_flags.resolve(), m_values, allow_large_m);
  } catch (const tfwf::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
