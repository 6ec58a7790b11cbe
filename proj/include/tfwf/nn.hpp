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

// Named parameter registry and the small affine building blocks shared by
// every model component.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfwf/ops.hpp"

namespace tfwf {

template <typename T>
struct Parameter {
  std::string name;
  std::string group;  // gradient-check / reporting bucket
  Tensor<T> value;
};

// Insertion-ordered set of learnable tensors. Names are unique.
template <typename T>
class ParameterStore {
 public:
  Tensor<T> add(std::string name, std::string group, Shape shape, std::vector<T> init) {
    if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
    auto t = Tensor<T>::from_data(std::move(shape), std::move(init), true);
    index_.emplace(name, params_.size());
    params_.push_back({std::move(name), std::move(group), t});
    return t;
  }

  const std::vector<Parameter<T>>& all() const { return params_; }
  std::vector<Parameter<T>>& all() { return params_; }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor<T>& at(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("no parameter named '" + name + "'");
    return params_[it->second].value;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }
  std::vector<std::string> groups() const {
    std::vector<std::string> out;
    for (const auto& p : params_)
      if (std::find(out.begin(), out.end(), p.group) == out.end()) out.push_back(p.group);
    return out;
  }
  void zero_grad() {
    for (auto& p : params_) p.value.zero_grad();
  }

 private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

using Rng = std::mt19937_64;

template <typename T>
std::vector<T> uniform_init(std::size_t n, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(dist(rng));
  return v;
}

// y = x W + b with W: [in, out]. Uniform(+-1/sqrt(in)) initialization.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore<T>& store, const std::string& name, const std::string& group, std::size_t in,
         std::size_t out, Rng& rng, bool bias = true)
      : in_(in), out_(out) {
    const double bound = in == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(in));
    weight_ = store.add(name + ".weight", group, {in, out}, uniform_init<T>(in * out, bound, rng));
    if (bias) bias_ = store.add(name + ".bias", group, {out}, uniform_init<T>(out, bound, rng));
  }

  Tensor<T> operator()(const Tensor<T>& x) const {
    auto y = matmul(x, weight_);
    return bias_.defined() ? add(y, bias_) : y;
  }

  const Tensor<T>& weight() const { return weight_; }
  const Tensor<T>& bias() const { return bias_; }
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Tensor<T> weight_;
  Tensor<T> bias_;
};

// Layer normalization over the last axis with learnable scale and shift.
template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore<T>& store, const std::string& name, const std::string& group, std::size_t dim,
            double eps = 1e-5)
      : eps_(eps) {
    gamma_ = store.add(name + ".gamma", group, {dim}, std::vector<T>(dim, T(1)));
    beta_ = store.add(name + ".beta", group, {dim}, std::vector<T>(dim, T(0)));
  }

  Tensor<T> operator()(const Tensor<T>& x) const { return add(mul(layer_norm(x, -1, eps_), gamma_), beta_); }

 private:
  double eps_ = 1e-5;
  Tensor<T> gamma_;
  Tensor<T> beta_;
};

// Linear -> GELU -> Linear.
template <typename T>
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterStore<T>& store, const std::string& name, const std::string& group, std::size_t in,
      std::size_t hidden, std::size_t out, Rng& rng)
      : fc1_(store, name + ".fc1", group, in, hidden, rng), fc2_(store, name + ".fc2", group, hidden, out, rng) {}

  Tensor<T> operator()(const Tensor<T>& x) const { return fc2_(gelu(fc1_(x))); }

  const Linear<T>& fc1() const { return fc1_; }
  const Linear<T>& fc2() const { return fc2_; }

 private:
  Linear<T> fc1_;
  Linear<T> fc2_;
};

}  // namespace tfwf
