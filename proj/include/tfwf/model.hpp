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

// The full link predictor: features -> wavelet block -> hybrid transformer
// -> pooling -> pair scores.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tfwf/config.hpp"
#include "tfwf/features.hpp"
#include "tfwf/link_predictor.hpp"
#include "tfwf/transformer.hpp"
#include "tfwf/wavelet.hpp"

namespace tfwf {

template <typename T>
class TFWaveFormer {
 public:
  // Intermediate tensors of one forward pass, kept for inspection and tests.
  struct Forward {
    Tensor<T> features;  // X_v: [B, L, d]
    Tensor<T> temporal;  // Z_t (undefined when the temporal stream is off)
    Tensor<T> gated;     // Z_gated (undefined when the frequency stream is off)
    Tensor<T> z0;
    Tensor<T> hidden;    // h_v: [B, L, d]
    Tensor<T> pooled;    // [B, d]
  };

  TFWaveFormer(const ModelConfig& config, std::size_t edge_dim, std::uint64_t seed)
      : config_(config), rng_(seed) {
    FeatureDims fd;
    fd.edge = std::max<std::size_t>(edge_dim, 1);
    fd.time = config.resolved_time_dim();
    fd.nif = config.resolved_nif_dim();
    fd.align = config.resolved_align_dim();
    fd.out = config.dim;
    features_ = FeatureEncoder<T>(params_, fd, rng_);
    wavelet_ = WaveletBlock<T>(params_, config.scales, config.dim, config.temperature, config.reg_lambda, rng_);
    TransformerDims td;
    td.length = config.seq_len;
    td.dim = config.dim;
    td.heads = config.heads;
    td.layers = config.layers;
    td.ffn = config.resolved_ffn_dim();
    td.dropout = config.dropout;
    transformer_ = HybridTransformer<T>(params_, td, rng_);
    head_ = ScoreHead<T>(params_, config.dim, rng_);
  }

  TFWaveFormer(const TFWaveFormer&) = delete;
  TFWaveFormer& operator=(const TFWaveFormer&) = delete;

  // `train_rng` enables dropout; pass nullptr for evaluation.
  Forward forward(const FeatureBatch& fb, Rng* train_rng = nullptr) const {
    if (fb.length != config_.seq_len) {
      throw DimensionError("feature batch length " + std::to_string(fb.length) + " does not match seq_len " +
                           std::to_string(config_.seq_len));
    }
    Forward f;
    f.features = features_(fb);
    if (!config_.disable_temporal) f.temporal = transformer_.compress(f.features);
    if (!config_.disable_frequency) f.gated = wavelet_(f.features);
    f.z0 = transformer_.fuse_streams(f.temporal, f.gated);
    const auto mask = make_attention_mask<T>(fb.valid, fb.batch, fb.length);
    f.hidden = transformer_.stack(f.z0, mask, train_rng);
    f.pooled = pool(f.hidden, fb.valid, config_.mask_aware_pool);
    return f;
  }

  Tensor<T> embed(const FeatureBatch& fb, Rng* train_rng = nullptr) const { return forward(fb, train_rng).pooled; }

  // Logits for rows (src_rows[i], dst_rows[i]) of `pooled`.
  Tensor<T> score(const Tensor<T>& pooled, const std::vector<std::size_t>& src_rows,
                  const std::vector<std::size_t>& dst_rows) const {
    return head_(gather_rows(pooled, src_rows), gather_rows(pooled, dst_rows));
  }

  Tensor<T> penalty() const { return wavelet_.penalty(); }

  const ModelConfig& config() const { return config_; }
  ParameterStore<T>& params() { return params_; }
  const ParameterStore<T>& params() const { return params_; }
  const FeatureEncoder<T>& features() const { return features_; }
  const WaveletBlock<T>& wavelet() const { return wavelet_; }
  WaveletBlock<T>& wavelet() { return wavelet_; }
  const HybridTransformer<T>& transformer() const { return transformer_; }
  const ScoreHead<T>& head() const { return head_; }
  Rng& rng() { return rng_; }

 private:
  ModelConfig config_;
  Rng rng_;
  ParameterStore<T> params_;
  FeatureEncoder<T> features_;
  WaveletBlock<T> wavelet_;
  HybridTransformer<T> transformer_;
  ScoreHead<T> head_;
};

// Queries and pair layout for a batch of positives and their negatives.
// Each pair (u, v) contributes two queries: u against v and v against u.
struct PairBatch {
  std::vector<Query> queries;
  std::vector<std::size_t> src_rows;
  std::vector<std::size_t> dst_rows;
  std::vector<std::uint8_t> labels;
};

inline void append_pair(PairBatch& pb, NodeId u, NodeId v, double t, bool label) {
  pb.src_rows.push_back(pb.queries.size());
  pb.queries.push_back({u, v, t});
  pb.dst_rows.push_back(pb.queries.size());
  pb.queries.push_back({v, u, t});
  pb.labels.push_back(label ? 1 : 0);
}

}  // namespace tfwf
