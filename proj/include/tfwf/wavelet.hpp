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

// Learnable multi-level wavelet block: parallel depthwise convolutions at m
// kernel sizes, temperature-softmax fusion across scales, and a sigmoid gate
// that reconstructs the fused signal.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tfwf/nn.hpp"

namespace tfwf {

// Zero padding on each side of the sequence for kernel size k. Odd k is
// centered; even k puts the extra tap on the left (k/2 left, k/2 - 1 right).
struct ConvPadding {
  std::size_t left = 0;
  std::size_t right = 0;
};

inline ConvPadding conv_padding(std::size_t k) {
  if (k % 2 == 1) return {k / 2, k / 2};
  return {k / 2, k / 2 - 1};
}

// Per-channel 1-D convolution. x: [L, d] or [B, L, d]; kernel: [d, k].
// out[b][t][i] = sum_j kernel[i][j] * x[b][t + j - left][i], zero outside.
template <typename T>
Tensor<T> depthwise_conv(const Tensor<T>& x, const Tensor<T>& kernel) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw DimensionError("depthwise_conv: input must be [L, d] or [B, L, d], got " + shape_str(x.shape()));
  }
  const std::size_t d = x.dim(x.rank() - 1);
  const std::size_t len = x.dim(x.rank() - 2);
  const std::size_t batch = x.rank() == 3 ? x.dim(0) : 1;
  if (kernel.rank() != 2 || kernel.dim(0) != d) {
    throw DimensionError("depthwise_conv: kernel " + shape_str(kernel.shape()) + " does not match input " +
                         shape_str(x.shape()));
  }
  const std::size_t k = kernel.dim(1);
  if (k == 0) throw ScaleError("depthwise_conv: kernel size must be positive");
  if (k > 2 * len) {
    throw ScaleError("depthwise_conv: kernel size " + std::to_string(k) + " exceeds twice the sequence length " +
                     std::to_string(len));
  }
  const auto pad = conv_padding(k);
  const auto xd = x.data();
  const auto kd = kernel.data();
  std::vector<T> out(x.size(), T(0));
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * len * d;
    for (std::size_t t = 0; t < len; ++t) {
      T* orow = out.data() + base + t * d;
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(pad.left);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
        const T* xrow = xd.data() + base + static_cast<std::size_t>(src) * d;
        for (std::size_t i = 0; i < d; ++i) orow[i] += kd[i * k + j] * xrow[i];
      }
    }
  }
  return detail::make_result<T>(
      "depthwise_conv", x.shape(), std::move(out), {x, kernel}, [batch, len, d, k, pad](Node<T>& self) {
        auto* gx = detail::parent_grad(self, 0);
        auto* gk = detail::parent_grad(self, 1);
        const auto& g = *self.grad;
        const auto& xd = self.parents[0]->data;
        const auto& kd = self.parents[1]->data;
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t base = b * len * d;
          for (std::size_t t = 0; t < len; ++t) {
            const T* grow = g.data() + base + t * d;
            for (std::size_t j = 0; j < k; ++j) {
              const std::ptrdiff_t src =
                  static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(pad.left);
              if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
              const std::size_t xoff = base + static_cast<std::size_t>(src) * d;
              for (std::size_t i = 0; i < d; ++i) {
                if (gx) (*gx)[xoff + i] += kd[i * k + j] * grow[i];
                if (gk) (*gk)[i * k + j] += xd[xoff + i] * grow[i];
              }
            }
          }
        }
      });
}

// Learnable kernels Psi: one [d, k] array per scale k in K.
template <typename T>
class WaveletBank {
 public:
  WaveletBank() = default;
  WaveletBank(ParameterStore<T>& store, std::vector<std::size_t> scales, std::size_t dim, double lambda, Rng& rng)
      : scales_(std::move(scales)), lambda_(lambda) {
    if (scales_.empty()) throw ConfigError("wavelet bank needs at least one scale");
    if (lambda_ < 0) throw ConfigError("regularization weight must be >= 0");
    for (std::size_t k : scales_) {
      if (k == 0) throw ConfigError("kernel sizes must be positive");
      const double bound = std::sqrt(1.0 / static_cast<double>(k));
      kernels_.push_back(store.add("wavelet.psi.k" + std::to_string(k) + "_" + std::to_string(kernels_.size()),
                                   "wavelet_kernels", {dim, k}, uniform_init<T>(dim * k, bound, rng)));
    }
  }

  const std::vector<std::size_t>& scales() const { return scales_; }
  const std::vector<Tensor<T>>& kernels() const { return kernels_; }
  double lambda() const { return lambda_; }
  std::size_t size() const { return scales_.size(); }

 private:
  std::vector<std::size_t> scales_;
  std::vector<Tensor<T>> kernels_;
  double lambda_ = 0.0;
};

// Parallel (non-cascaded) application of every scale's kernels.
template <typename T>
std::vector<Tensor<T>> decompose(const Tensor<T>& x, const WaveletBank<T>& bank) {
  std::vector<Tensor<T>> out;
  out.reserve(bank.size());
  for (const auto& kernel : bank.kernels()) out.push_back(depthwise_conv(x, kernel));
  return out;
}

// lambda * sum of squared kernel entries.
template <typename T>
Tensor<T> reg_penalty(const WaveletBank<T>& bank) {
  Tensor<T> total = Tensor<T>::scalar(T(0));
  for (const auto& kernel : bank.kernels()) total = add(total, sum(mul(kernel, kernel)));
  return scale(total, static_cast<T>(bank.lambda()));
}

// Scale weights w_k (one length-d vector per scale) and temperature tau.
template <typename T>
class ScaleAttention {
 public:
  ScaleAttention() = default;
  ScaleAttention(ParameterStore<T>& store, std::size_t num_scales, std::size_t dim, double temperature)
      : temperature_(temperature) {
    if (!(temperature > 0)) throw ParameterError("scale attention temperature must be > 0");
    weights_ = store.add("wavelet.scale_weights", "scale_weights", {num_scales, dim},
                         std::vector<T>(num_scales * dim, T(0)));
  }

  // S: [m, d], each column sums to one.
  Tensor<T> scale_softmax() const { return softmax(weights_, 0, static_cast<T>(temperature_)); }

  const Tensor<T>& weights() const { return weights_; }
  double temperature() const { return temperature_; }
  void set_temperature(double tau) {
    if (!(tau > 0)) throw ParameterError("scale attention temperature must be > 0");
    temperature_ = tau;
  }

 private:
  Tensor<T> weights_;
  double temperature_ = 1.0;
};

// Z_ms = sum_k S_k (.) Z_k, S_k broadcast along the sequence axis.
template <typename T>
Tensor<T> scale_fuse(const std::vector<Tensor<T>>& zs, const ScaleAttention<T>& attn) {
  if (zs.empty()) throw ContractError("scale_fuse: no scale outputs");
  const auto s = attn.scale_softmax();
  if (s.dim(0) != zs.size()) {
    throw DimensionError("scale_fuse: " + std::to_string(zs.size()) + " scale outputs but weights " +
                         shape_str(s.shape()));
  }
  const std::size_t d = s.dim(1);
  Tensor<T> acc;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const auto weight = reshape(slice(s, 0, k, k + 1), {d});
    const auto term = mul(zs[k], weight);
    acc = k == 0 ? term : add(acc, term);
  }
  return acc;
}

// G = sigmoid(f2(GELU(f1(Z)))), with f1, f2 affine d -> d.
template <typename T>
class GateNetwork {
 public:
  GateNetwork() = default;
  GateNetwork(ParameterStore<T>& store, std::size_t dim, Rng& rng)
      : f1_(store, "gate.f1", "gate", dim, dim, rng), f2_(store, "gate.f2", "gate", dim, dim, rng) {}

  Tensor<T> gate(const Tensor<T>& z_ms) const { return sigmoid(f2_(gelu(f1_(z_ms)))); }
  Tensor<T> operator()(const Tensor<T>& z_ms) const { return mul(gate(z_ms), z_ms); }

  const Linear<T>& f1() const { return f1_; }
  const Linear<T>& f2() const { return f2_; }

 private:
  Linear<T> f1_;
  Linear<T> f2_;
};

template <typename T>
Tensor<T> gate_reconstruct(const Tensor<T>& z_ms, const GateNetwork<T>& gate) {
  return gate(z_ms);
}

// Decompose -> fuse -> gate, mapping [B, L, d] to [B, L, d].
template <typename T>
class WaveletBlock {
 public:
  struct Trace {
    std::vector<Tensor<T>> scales;
    Tensor<T> fused;
    Tensor<T> gated;
  };

  WaveletBlock() = default;
  WaveletBlock(ParameterStore<T>& store, std::vector<std::size_t> scales, std::size_t dim, double temperature,
               double lambda, Rng& rng)
      : bank_(store, std::move(scales), dim, lambda, rng),
        attention_(store, bank_.size(), dim, temperature),
        gate_(store, dim, rng) {}

  Trace trace(const Tensor<T>& x) const {
    Trace tr;
    tr.scales = decompose(x, bank_);
    tr.fused = scale_fuse(tr.scales, attention_);
    tr.gated = gate_reconstruct(tr.fused, gate_);
    return tr;
  }
  Tensor<T> operator()(const Tensor<T>& x) const { return trace(x).gated; }
  Tensor<T> penalty() const { return reg_penalty(bank_); }

  const WaveletBank<T>& bank() const { return bank_; }
  const ScaleAttention<T>& attention() const { return attention_; }
  ScaleAttention<T>& attention() { return attention_; }
  const GateNetwork<T>& gate() const { return gate_; }

 private:
  WaveletBank<T> bank_;
  ScaleAttention<T> attention_;
  GateNetwork<T> gate_;
};

}  // namespace tfwf
