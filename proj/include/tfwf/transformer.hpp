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

// Temporal-frequency hybrid transformer: stream fusion with sinusoidal
// positions followed by post-norm multi-head self-attention layers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tfwf/nn.hpp"

namespace tfwf {

// PE[pos][2i] = sin(pos / 10000^(2i/d)), PE[pos][2i+1] = cos(same angle).
template <typename T>
Tensor<T> positional_table(std::size_t length, std::size_t dim) {
  if (dim % 2 != 0) throw ConfigError("positional encoding needs an even dimension, got " + std::to_string(dim));
  std::vector<T> table(length * dim);
  for (std::size_t pos = 0; pos < length; ++pos)
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(dim));
      table[pos * dim + 2 * i] = static_cast<T>(std::sin(angle));
      table[pos * dim + 2 * i + 1] = static_cast<T>(std::cos(angle));
    }
  return Tensor<T>::from_data({length, dim}, std::move(table));
}

namespace detail {

// Finite stand-in for -inf: masked logits underflow to exactly zero weight.
template <typename T>
constexpr T masked_logit() {
  return static_cast<T>(-1e30);
}

// Inverted dropout; identity when rng is null or rate is zero.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Rng* rng) {
  if (!rng || rate <= 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<T> mask(x.size());
  const T scale_kept = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask) m = keep(*rng) ? scale_kept : T(0);
  return mul(x, Tensor<T>::from_data(x.shape(), std::move(mask)));
}

}  // namespace detail

// Padding-mask derived constants for one batch of [B, L] slots.
template <typename T>
struct AttentionMask {
  Tensor<T> logit_bias;  // [B, L, L]: 0 for valid keys, masked_logit otherwise
  Tensor<T> row_keep;    // [B, L, L]: zero rows for sequences without any valid key; undefined if none
};

template <typename T>
AttentionMask<T> make_attention_mask(const std::vector<std::uint8_t>& valid, std::size_t batch, std::size_t length) {
  if (valid.size() != batch * length) {
    throw DimensionError("attention mask has " + std::to_string(valid.size()) + " entries, expected [" +
                         std::to_string(batch) + ", " + std::to_string(length) + "]");
  }
  std::vector<T> bias(batch * length * length, T(0));
  std::vector<T> keep(batch * length * length, T(1));
  bool any_empty = false;
  for (std::size_t b = 0; b < batch; ++b) {
    bool has_valid = false;
    for (std::size_t j = 0; j < length; ++j) has_valid = has_valid || valid[b * length + j];
    for (std::size_t q = 0; q < length; ++q)
      for (std::size_t j = 0; j < length; ++j) {
        const std::size_t at = (b * length + q) * length + j;
        if (!valid[b * length + j]) bias[at] = detail::masked_logit<T>();
        if (!has_valid) keep[at] = T(0);
      }
    any_empty = any_empty || !has_valid;
  }
  AttentionMask<T> m;
  m.logit_bias = Tensor<T>::from_data({batch, length, length}, std::move(bias));
  if (any_empty) m.row_keep = Tensor<T>::from_data({batch, length, length}, std::move(keep));
  return m;
}

// h heads with per-head projections W_i^{Q,K,V}: d x (d/h), output W^O: d x d.
template <typename T>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParameterStore<T>& store, const std::string& name, std::size_t dim, std::size_t heads,
                         Rng& rng)
      : dim_(dim), heads_(heads) {
    if (heads == 0 || dim % heads != 0) {
      throw ConfigError("model dimension " + std::to_string(dim) + " not divisible by " + std::to_string(heads) +
                        " heads");
    }
    const std::size_t dk = dim / heads;
    const std::string group = name + ".attention";
    for (std::size_t i = 0; i < heads; ++i) {
      const std::string head = name + ".head" + std::to_string(i);
      wq_.push_back(Linear<T>(store, head + ".query", group, dim, dk, rng, false));
      wk_.push_back(Linear<T>(store, head + ".key", group, dim, dk, rng, false));
      wv_.push_back(Linear<T>(store, head + ".value", group, dim, dk, rng, false));
    }
    wo_ = Linear<T>(store, name + ".output", group, dim, dim, rng, false);
  }

  // Attention weights of head i: [B, L, L].
  Tensor<T> weights(const Tensor<T>& z, const AttentionMask<T>& mask, std::size_t head) const {
    const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dim_ / heads_)));
    const auto q = wq_[head](z);
    const auto k = wk_[head](z);
    const auto logits = add(scale(matmul(q, transpose(k)), inv_sqrt), mask.logit_bias);
    auto w = softmax(logits, -1);
    if (mask.row_keep.defined()) w = mul(w, mask.row_keep);
    return w;
  }

  // z: [B, L, d] -> [B, L, d].
  Tensor<T> operator()(const Tensor<T>& z, const AttentionMask<T>& mask) const {
    if (z.rank() != 3 || z.dim(2) != dim_) {
      throw DimensionError("mhsa: expected [B, L, " + std::to_string(dim_) + "], got " + shape_str(z.shape()));
    }
    std::vector<Tensor<T>> heads;
    heads.reserve(heads_);
    for (std::size_t i = 0; i < heads_; ++i) heads.push_back(matmul(weights(z, mask, i), wv_[i](z)));
    return wo_(heads_ == 1 ? heads.front() : concat(heads, -1));
  }

  std::size_t heads() const { return heads_; }
  const Linear<T>& output() const { return wo_; }
  const Linear<T>& value(std::size_t i) const { return wv_.at(i); }

 private:
  std::size_t dim_ = 0;
  std::size_t heads_ = 1;
  std::vector<Linear<T>> wq_;
  std::vector<Linear<T>> wk_;
  std::vector<Linear<T>> wv_;
  Linear<T> wo_;
};

// Z1 = LN(Z0 + MHSA(Z0)); h = LN(Z1 + MLP(Z1)).
template <typename T>
class TransformerLayer {
 public:
  TransformerLayer() = default;
  TransformerLayer(ParameterStore<T>& store, const std::string& name, std::size_t dim, std::size_t heads,
                   std::size_t ffn_dim, double dropout, Rng& rng)
      : attention_(store, name, dim, heads, rng),
        norm1_(store, name + ".norm1", name + ".norm", dim),
        ffn_(store, name + ".ffn", name + ".ffn", dim, ffn_dim, dim, rng),
        norm2_(store, name + ".norm2", name + ".norm", dim),
        dropout_(dropout) {}

  Tensor<T> operator()(const Tensor<T>& z0, const AttentionMask<T>& mask, Rng* train_rng = nullptr) const {
    const auto z1 = norm1_(add(z0, detail::dropout(attention_(z0, mask), dropout_, train_rng)));
    return norm2_(add(z1, detail::dropout(ffn_(z1), dropout_, train_rng)));
  }

  const MultiHeadSelfAttention<T>& attention() const { return attention_; }

 private:
  MultiHeadSelfAttention<T> attention_;
  LayerNorm<T> norm1_;
  Mlp<T> ffn_;
  LayerNorm<T> norm2_;
  double dropout_ = 0.0;
};

struct TransformerDims {
  std::size_t length = 32;
  std::size_t dim = 64;
  std::size_t heads = 2;
  std::size_t layers = 2;
  std::size_t ffn = 256;
  double dropout = 0.0;
};

// Z0 = LN(MLP(X) + Z_gated + PE) and the layer stack.
template <typename T>
class HybridTransformer {
 public:
  HybridTransformer() = default;
  HybridTransformer(ParameterStore<T>& store, const TransformerDims& dims, Rng& rng)
      : dims_(dims),
        compressor_(store, "temporal_mlp", "temporal_mlp", dims.dim, dims.dim, dims.dim, rng),
        input_norm_(store, "input_norm", "input_norm", dims.dim),
        pe_(positional_table<T>(dims.length, dims.dim)) {
    if (dims.layers == 0) throw ConfigError("transformer needs at least one layer");
    for (std::size_t l = 0; l < dims.layers; ++l)
      layers_.emplace_back(store, "layer" + std::to_string(l), dims.dim, dims.heads, dims.ffn, dims.dropout, rng);
  }

  Tensor<T> compress(const Tensor<T>& x) const { return compressor_(x); }

  // Either stream may be undefined to drop it (ablation).
  Tensor<T> fuse_streams(const Tensor<T>& z_temporal, const Tensor<T>& z_gated, bool use_position = true) const {
    Tensor<T> acc;
    for (const auto* part : {&z_temporal, &z_gated}) {
      if (!part->defined()) continue;
      if (acc.defined() && acc.shape() != part->shape()) {
        throw DimensionError("fuse_streams: shapes " + shape_str(acc.shape()) + " and " +
                             shape_str(part->shape()) + " differ");
      }
      acc = acc.defined() ? add(acc, *part) : *part;
    }
    if (!acc.defined()) throw ContractError("fuse_streams: both streams disabled");
    if (use_position) {
      if (acc.dim(acc.rank() - 2) != dims_.length) {
        throw DimensionError("fuse_streams: sequence shape " + shape_str(acc.shape()) +
                             " does not match positional table " + shape_str(pe_.shape()));
      }
      acc = add(acc, pe_);
    }
    return input_norm_(acc);
  }

  Tensor<T> stack(const Tensor<T>& z0, const AttentionMask<T>& mask, Rng* train_rng = nullptr) const {
    Tensor<T> h = z0;
    for (const auto& layer : layers_) h = layer(h, mask, train_rng);
    return h;
  }

  const TransformerDims& dims() const { return dims_; }
  const std::vector<TransformerLayer<T>>& layers() const { return layers_; }
  const Tensor<T>& positions() const { return pe_; }

 private:
  TransformerDims dims_;
  Mlp<T> compressor_;
  LayerNorm<T> input_norm_;
  Tensor<T> pe_;
  std::vector<TransformerLayer<T>> layers_;
};

}  // namespace tfwf
