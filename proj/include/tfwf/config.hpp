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

// Run configuration: flat `key = value` files, validation, and the canonical
// text form echoed into logs and checkpoints.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tfwf/errors.hpp"
#include "tfwf/sampler.hpp"
#include "tfwf/temporal_graph.hpp"

namespace tfwf {

inline std::string to_string(Setting s) { return s == Setting::kInductive ? "inductive" : "transductive"; }

inline Setting parse_setting(const std::string& s) {
  if (s == "transductive") return Setting::kTransductive;
  if (s == "inductive") return Setting::kInductive;
  throw ConfigError("unknown setting '" + s + "'");
}

// First m odd kernel sizes: 1, 3, 5, ...
inline std::vector<std::size_t> default_scales(std::size_t m) {
  std::vector<std::size_t> k(m);
  for (std::size_t i = 0; i < m; ++i) k[i] = 2 * i + 1;
  return k;
}

struct ModelConfig {
  std::size_t seq_len = 32;
  std::size_t dim = 64;
  std::size_t heads = 2;
  std::size_t layers = 2;
  std::vector<std::size_t> scales = {1, 3, 5};
  double temperature = 1.0;
  double reg_lambda = 1e-5;
  std::size_t time_dim = 0;   // 0: dim / 2
  std::size_t nif_dim = 0;    // 0: dim / 2
  std::size_t align_dim = 0;  // 0: dim / 2
  std::size_t ffn_dim = 0;    // 0: 4 * dim
  double dropout = 0.0;
  bool nif_include_self = true;
  bool mask_aware_pool = false;
  bool disable_temporal = false;
  bool disable_frequency = false;

  std::size_t resolved_time_dim() const { return time_dim ? time_dim : dim / 2; }
  std::size_t resolved_nif_dim() const { return nif_dim ? nif_dim : dim / 2; }
  std::size_t resolved_align_dim() const { return align_dim ? align_dim : dim / 2; }
  std::size_t resolved_ffn_dim() const { return ffn_dim ? ffn_dim : 4 * dim; }
};

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 50;
  std::size_t epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
  bool record_wall_time = false;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  Setting setting = Setting::kTransductive;
  Strategy strategy = Strategy::kRandom;
  double train_fraction = 0.70;
  double val_fraction = 0.15;
  double inductive_fraction = 0.10;
  std::size_t max_events = 0;  // 0: use every event in the file
  std::string dataset_name = "dataset";

  // Run locations and scheduling. Accepted in config files like every other
  // key, but not part of the hyperparameter record written by to_text().
  std::string data_path;
  std::string out_path;
  std::size_t parallel = 1;

  std::size_t m() const { return model.scales.size(); }

  void validate() const {
    const auto& mc = model;
    if (mc.seq_len == 0) throw ConfigError("seq_len must be >= 1");
    if (mc.dim == 0 || mc.dim % 2 != 0) throw ConfigError("dim must be a positive even number");
    if (mc.heads == 0 || mc.dim % mc.heads != 0) throw ConfigError("dim must be divisible by heads");
    if (mc.layers == 0) throw ConfigError("layers must be >= 1");
    if (mc.scales.empty()) throw ConfigError("at least one wavelet scale is required");
    for (auto k : mc.scales) {
      if (k == 0) throw ConfigError("wavelet kernel sizes must be positive");
      if (k > 2 * mc.seq_len) throw ConfigError("wavelet kernel size exceeds twice seq_len");
    }
    if (!(mc.temperature > 0)) throw ConfigError("temperature must be > 0");
    if (mc.reg_lambda < 0) throw ConfigError("lambda must be >= 0");
    if (mc.dropout < 0 || mc.dropout >= 1) throw ConfigError("dropout must lie in [0, 1)");
    if (mc.disable_temporal && mc.disable_frequency) {
      throw ConfigError("disable_temporal and disable_frequency cannot both be set");
    }
    if (!(train.lr > 0)) throw ConfigError("lr must be > 0");
    if (train.beta1 < 0 || train.beta1 >= 1 || train.beta2 < 0 || train.beta2 >= 1) {
      throw ConfigError("betas must lie in [0, 1)");
    }
    if (!(train.eps > 0)) throw ConfigError("eps must be > 0");
    if (train.batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (train_fraction <= 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0 + 1e-12) {
      throw ConfigError("split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
    }
    if (inductive_fraction < 0 || inductive_fraction >= 1) {
      throw ConfigError("inductive_fraction must lie in [0, 1)");
    }
    if (parallel == 0) throw ConfigError("parallel must be >= 1");
    if (setting == Setting::kInductive && inductive_fraction == 0) {
      throw ConfigError("inductive setting needs inductive_fraction > 0");
    }
  }

  // Applies one key. Unknown keys and malformed values are errors.
  void set(const std::string& key, const std::string& value);

  // Canonical `key = value` lines in a fixed order.
  std::string to_text() const;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<std::size_t>(parse_uint(key, trim(item))));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

inline std::string real_text(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  const auto size = [&] { return static_cast<std::size_t>(parse_uint(key, v)); };
  auto& mc = model;
  auto& tc = train;
  if (key == "seq_len") mc.seq_len = size();
  else if (key == "dim") mc.dim = size();
  else if (key == "heads") mc.heads = size();
  else if (key == "layers") mc.layers = size();
  else if (key == "m") {
    const auto m_value = size();
    if (m_value == 0) throw ConfigError("m must be >= 1");
    mc.scales = default_scales(m_value);
  } else if (key == "scales") mc.scales = parse_sizes(key, v);
  else if (key == "temperature") mc.temperature = parse_real(key, v);
  else if (key == "lambda") mc.reg_lambda = parse_real(key, v);
  else if (key == "time_dim") mc.time_dim = size();
  else if (key == "nif_dim") mc.nif_dim = size();
  else if (key == "align_dim") mc.align_dim = size();
  else if (key == "ffn_dim") mc.ffn_dim = size();
  else if (key == "dropout") mc.dropout = parse_real(key, v);
  else if (key == "nif_include_self") mc.nif_include_self = parse_bool(key, v);
  else if (key == "mask_aware_pool") mc.mask_aware_pool = parse_bool(key, v);
  else if (key == "disable_temporal") mc.disable_temporal = parse_bool(key, v);
  else if (key == "disable_frequency") mc.disable_frequency = parse_bool(key, v);
  else if (key == "lr") tc.lr = parse_real(key, v);
  else if (key == "beta1") tc.beta1 = parse_real(key, v);
  else if (key == "beta2") tc.beta2 = parse_real(key, v);
  else if (key == "eps") tc.eps = parse_real(key, v);
  else if (key == "batch_size") tc.batch_size = size();
  else if (key == "epochs") tc.epochs = size();
  else if (key == "patience") tc.patience = size();
  else if (key == "seed") tc.seed = parse_uint(key, v);
  else if (key == "record_wall_time") tc.record_wall_time = parse_bool(key, v);
  else if (key == "setting") setting = parse_setting(v);
  else if (key == "strategy") strategy = parse_strategy(v);
  else if (key == "train_fraction") train_fraction = parse_real(key, v);
  else if (key == "val_fraction") val_fraction = parse_real(key, v);
  else if (key == "inductive_fraction") inductive_fraction = parse_real(key, v);
  else if (key == "max_events") max_events = size();
  else if (key == "dataset_name") dataset_name = v;
  else if (key == "data") data_path = v;
  else if (key == "out") out_path = v;
  else if (key == "parallel") parallel = size();
  else throw ConfigError("unknown config key '" + key + "'");
}

inline std::string RunConfig::to_text() const {
  using detail::real_text;
  const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  std::ostringstream os;
  os << "seq_len = " << model.seq_len << '\n'
     << "dim = " << model.dim << '\n'
     << "heads = " << model.heads << '\n'
     << "layers = " << model.layers << '\n'
     << "scales = " << detail::join_sizes(model.scales) << '\n'
     << "temperature = " << real_text(model.temperature) << '\n'
     << "lambda = " << real_text(model.reg_lambda) << '\n'
     << "time_dim = " << model.time_dim << '\n'
     << "nif_dim = " << model.nif_dim << '\n'
     << "align_dim = " << model.align_dim << '\n'
     << "ffn_dim = " << model.ffn_dim << '\n'
     << "dropout = " << real_text(model.dropout) << '\n'
     << "nif_include_self = " << b(model.nif_include_self) << '\n'
     << "mask_aware_pool = " << b(model.mask_aware_pool) << '\n'
     << "disable_temporal = " << b(model.disable_temporal) << '\n'
     << "disable_frequency = " << b(model.disable_frequency) << '\n'
     << "lr = " << real_text(train.lr) << '\n'
     << "beta1 = " << real_text(train.beta1) << '\n'
     << "beta2 = " << real_text(train.beta2) << '\n'
     << "eps = " << real_text(train.eps) << '\n'
     << "batch_size = " << train.batch_size << '\n'
     << "epochs = " << train.epochs << '\n'
     << "patience = " << train.patience << '\n'
     << "seed = " << train.seed << '\n'
     << "record_wall_time = " << b(train.record_wall_time) << '\n'
     << "setting = " << to_string(setting) << '\n'
     << "strategy = " << to_string(strategy) << '\n'
     << "train_fraction = " << real_text(train_fraction) << '\n'
     << "val_fraction = " << real_text(val_fraction) << '\n'
     << "inductive_fraction = " << real_text(inductive_fraction) << '\n'
     << "max_events = " << max_events << '\n'
     << "dataset_name = " << dataset_name << '\n';
  return os.str();
}

// Applies `key = value` lines; '#' starts a comment. A file may not set both
// `m` and `scales` inconsistently.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    if (key == "m" && seen.count("scales")) {
      if (detail::parse_uint(key, value) != cfg.model.scales.size()) {
        throw ConfigError("config sets m = " + value + " but lists " + std::to_string(cfg.model.scales.size()) +
                          " scales");
      }
      continue;
    }
    if (key == "scales" && seen.count("m")) {
      const auto list = detail::parse_sizes(key, value);
      if (list.size() != cfg.model.scales.size()) {
        throw ConfigError("config lists " + std::to_string(list.size()) + " scales but sets m = " +
                          std::to_string(cfg.model.scales.size()));
      }
    }
    cfg.set(key, value);
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(base, ss.str());
  return base;
}

}  // namespace tfwf
