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

#include <cmath>
#include <cstdint>
#include <vector>

#include "tfwf/nn.hpp"

namespace tfwf {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive moment estimation with bias correction. Parameters without a
// gradient this step are left untouched (their moments do not decay).
template <typename T>
class Adam {
 public:
  Adam(ParameterStore<T>& params, AdamOptions options) : params_(&params), options_(options) {
    for (const auto& p : params.all()) {
      first_.emplace_back(p.value.size(), T(0));
      second_.emplace_back(p.value.size(), T(0));
    }
  }

  void step() {
    ++steps_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
    auto& all = params_->all();
    for (std::size_t k = 0; k < all.size(); ++k) {
      auto& tensor = all[k].value;
      if (!tensor.has_grad()) continue;
      const auto g = tensor.grad();
      auto x = tensor.mutable_data();
      auto& m = first_[k];
      auto& v = second_[k];
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double gi = g[i];
        const double mi = options_.beta1 * m[i] + (1.0 - options_.beta1) * gi;
        const double vi = options_.beta2 * v[i] + (1.0 - options_.beta2) * gi * gi;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        x[i] = static_cast<T>(x[i] - options_.lr * (mi / c1) / (std::sqrt(vi / c2) + options_.eps));
      }
    }
  }

  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t s) { steps_ = s; }
  const AdamOptions& options() const { return options_; }
  std::vector<std::vector<T>>& first_moments() { return first_; }
  std::vector<std::vector<T>>& second_moments() { return second_; }
  const std::vector<std::vector<T>>& first_moments() const { return first_; }
  const std::vector<std::vector<T>>& second_moments() const { return second_; }

 private:
  ParameterStore<T>* params_;
  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<T>> first_;
  std::vector<std::vector<T>> second_;
};

}  // namespace tfwf
