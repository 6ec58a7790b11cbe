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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tfwf/nn.hpp"

namespace tfwf {

// Mean over the sequence axis of h: [B, L, d] -> [B, d]. The default divisor
// is L; mask_aware divides by the number of valid slots instead (at least 1).
template <typename T>
Tensor<T> pool(const Tensor<T>& h, const std::vector<std::uint8_t>& valid = {}, bool mask_aware = false) {
  if (h.rank() != 3) throw DimensionError("pool: expected [B, L, d], got " + shape_str(h.shape()));
  if (!mask_aware) return mean(h, 1);
  const std::size_t batch = h.dim(0);
  const std::size_t len = h.dim(1);
  if (valid.size() != batch * len) throw DimensionError("pool: mask size does not match " + shape_str(h.shape()));
  std::vector<T> weights(batch * len);
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t count = 0;
    for (std::size_t s = 0; s < len; ++s) count += valid[b * len + s];
    const T w = static_cast<T>(1.0 / static_cast<double>(std::max<std::size_t>(count, 1)));
    for (std::size_t s = 0; s < len; ++s) weights[b * len + s] = valid[b * len + s] ? w : T(0);
  }
  const auto mask = Tensor<T>::from_data({batch, len, 1}, std::move(weights));
  return sum(mul(h, mask), 1);
}

// s_uv = w^T (h_u (.) h_v) + b.
template <typename T>
class ScoreHead {
 public:
  ScoreHead() = default;
  ScoreHead(ParameterStore<T>& store, std::size_t dim, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    w_ = store.add("score.w", "score_head", {dim}, uniform_init<T>(dim, bound, rng));
    b_ = store.add("score.b", "score_head", {1}, {T(0)});
  }

  // hu, hv: [P, d] -> logits [P].
  Tensor<T> operator()(const Tensor<T>& hu, const Tensor<T>& hv) const {
    if (hu.shape() != hv.shape()) {
      throw DimensionError("score: embeddings " + shape_str(hu.shape()) + " and " + shape_str(hv.shape()) +
                           " differ");
    }
    return add(sum(mul(mul(hu, hv), w_), -1), b_);
  }

  const Tensor<T>& w() const { return w_; }
  const Tensor<T>& b() const { return b_; }

 private:
  Tensor<T> w_;
  Tensor<T> b_;
};

// Mean of log(1 + exp(-y* s)) with y* = 2y - 1.
template <typename T>
Tensor<T> link_loss(const Tensor<T>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() == 0) throw ContractError("loss: empty batch");
  if (scores.size() != labels.size()) {
    throw DimensionError("loss: " + std::to_string(scores.size()) + " scores but " +
                         std::to_string(labels.size()) + " labels");
  }
  std::vector<T> sign(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw ContractError("loss: labels must be 0 or 1");
    sign[i] = labels[i] ? T(-1) : T(1);
  }
  const auto neg_margin = mul(reshape(scores, {scores.size()}), Tensor<T>::from_data({labels.size()}, std::move(sign)));
  return mean(softplus(neg_margin));
}

inline double sigmoid_value(double s) { return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

}  // namespace tfwf
