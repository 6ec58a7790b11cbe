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

// Per-node sequence features: time encoding, neighbor co-occurrence (NIF)
// counts, modality alignment and concatenate-then-reduce fusion.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tfwf/nn.hpp"
#include "tfwf/temporal_graph.hpp"

namespace tfwf {

// One sequence to embed: `node`'s history before `t`, with co-occurrence
// counts taken against `partner`'s history at the same time.
struct Query {
  NodeId node = 0;
  NodeId partner = 0;
  double t = 0.0;
};

struct NifRaw {
  std::vector<float> node_side;     // length x 2
  std::vector<float> partner_side;  // length x 2
};

namespace detail {

inline std::vector<float> nif_side(const NeighborSequence& own, const NeighborSequence& other, bool include_self,
                                   NodeId own_id, NodeId other_id) {
  const std::size_t len = own.length();
  std::vector<float> out(len * 2, 0.0f);
  for (std::size_t j = 0; j < len; ++j) {
    if (!own.valid[j]) continue;
    const NodeId n = own.neighbor_ids[j];
    std::size_t cross = 0;
    std::size_t self = 0;
    for (std::size_t i = 0; i < other.length(); ++i)
      if (other.valid[i] && other.neighbor_ids[i] == n) ++cross;
    for (std::size_t i = 0; i < len; ++i)
      if (own.valid[i] && own.neighbor_ids[i] == n) ++self;
    if (include_self) {
      cross += n == other_id ? 1 : 0;
      self += n == own_id ? 1 : 0;
    }
    out[j * 2] = static_cast<float>(cross);
    out[j * 2 + 1] = static_cast<float>(self);
  }
  return out;
}

}  // namespace detail

// Column 0: occurrences of the slot's neighbor in the other sequence.
// Column 1: occurrences of the slot's neighbor in its own sequence.
// With include_self, each node also counts as a member of its own
// neighborhood, which makes "v appears in u's history" visible on bipartite
// graphs where the two histories never share ids.
inline NifRaw nif_raw(const NeighborSequence& seq_v, const NeighborSequence& seq_u, bool include_self = false,
                      NodeId v = 0, NodeId u = 0) {
  return {detail::nif_side(seq_v, seq_u, include_self, v, u), detail::nif_side(seq_u, seq_v, include_self, u, v)};
}

// Raw (pre-encoder) inputs for a batch of queries, laid out slot-major.
struct FeatureBatch {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::size_t edge_dim = 0;  // at least 1; zero-filled when the data has none
  std::vector<double> deltas;
  std::vector<float> edge_feats;
  std::vector<float> nif;
  std::vector<std::uint8_t> valid;

  std::size_t rows() const { return batch * length; }
};

inline FeatureBatch build_features(const EventStore& store, const std::vector<Query>& queries, std::size_t length,
                                   bool nif_include_self) {
  FeatureBatch fb;
  fb.batch = queries.size();
  fb.length = length;
  fb.edge_dim = std::max<std::size_t>(store.edge_dim(), 1);
  const std::size_t rows = fb.rows();
  fb.deltas.assign(rows, 0.0);
  fb.edge_feats.assign(rows * fb.edge_dim, 0.0f);
  fb.nif.assign(rows * 2, 0.0f);
  fb.valid.assign(rows, 0);
  for (std::size_t b = 0; b < queries.size(); ++b) {
    const auto& q = queries[b];
    const auto seq = store.recent_neighbors(q.node, q.t, length);
    const auto other = store.recent_neighbors(q.partner, q.t, length);
    const auto counts = detail::nif_side(seq, other, nif_include_self, q.node, q.partner);
    for (std::size_t s = 0; s < length; ++s) {
      const std::size_t r = b * length + s;
      fb.valid[r] = seq.valid[s];
      fb.deltas[r] = seq.valid[s] ? q.t - seq.timestamps[s] : 0.0;
      for (std::size_t k = 0; k < store.edge_dim(); ++k)
        fb.edge_feats[r * fb.edge_dim + k] = seq.edge_feats[s * store.edge_dim() + k];
      fb.nif[r * 2] = counts[s * 2];
      fb.nif[r * 2 + 1] = counts[s * 2 + 1];
    }
  }
  return fb;
}

// cos(delta * omega + phi), one row per delta.
template <typename T>
class TimeEncoder {
 public:
  TimeEncoder() = default;
  TimeEncoder(ParameterStore<T>& store, std::size_t dim) : dim_(dim) {
    std::vector<T> omega(dim);
    for (std::size_t k = 0; k < dim; ++k)
      omega[k] = static_cast<T>(1.0 / std::pow(10.0, 2.0 * static_cast<double>(k) / static_cast<double>(dim)));
    omega_ = store.add("time.omega", "time_encoder", {1, dim}, std::move(omega));
    phi_ = store.add("time.phi", "time_encoder", {dim}, std::vector<T>(dim, T(0)));
  }

  // deltas: shape [rows] -> [rows, dim].
  Tensor<T> operator()(const Tensor<T>& deltas) const {
    const auto col = reshape(deltas, {deltas.size(), 1});
    return cos(add(matmul(col, omega_), phi_));
  }

  std::size_t dim() const { return dim_; }
  const Tensor<T>& omega() const { return omega_; }
  const Tensor<T>& phi() const { return phi_; }

 private:
  std::size_t dim_ = 0;
  Tensor<T> omega_;
  Tensor<T> phi_;
};

struct FeatureDims {
  std::size_t edge = 1;
  std::size_t time = 32;
  std::size_t nif = 32;
  std::size_t align = 32;
  std::size_t out = 64;
};

// Builds X_v = Reduce(Concat(align_m(H^m))) for m in {node, edge, time, nif}.
template <typename T>
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(ParameterStore<T>& store, const FeatureDims& dims, Rng& rng)
      : dims_(dims),
        time_(store, dims.time),
        nif_(store, "nif", "nif_encoder", 2, dims.nif, dims.nif, rng),
        align_node_(store, "align.node", "align_node", dims.align, dims.align, rng),
        align_edge_(store, "align.edge", "align_edge", dims.edge, dims.align, rng),
        align_time_(store, "align.time", "align_time", dims.time, dims.align, rng),
        align_nif_(store, "align.nif", "align_nif", dims.nif, dims.align, rng),
        reduce_(store, "reduce", "reduce", 4 * dims.align, dims.out, rng) {}

  Tensor<T> encode_time(const Tensor<T>& deltas) const { return time_(deltas); }
  Tensor<T> encode_nif(const Tensor<T>& raw) const { return nif_(raw); }

  // All inputs are [rows, width_m]; output [rows, out].
  Tensor<T> fuse(const Tensor<T>& node_f, const Tensor<T>& edge_f, const Tensor<T>& time_f,
                 const Tensor<T>& nif_f) const {
    const std::size_t rows = node_f.dim(0);
    for (const auto* t : {&edge_f, &time_f, &nif_f}) {
      if (t->rank() != 2 || t->dim(0) != rows) {
        throw DimensionError("fuse: row counts differ between " + shape_str(node_f.shape()) + " and " +
                             shape_str(t->shape()));
      }
    }
    const auto joined =
        concat<T>({align_node_(node_f), align_edge_(edge_f), align_time_(time_f), align_nif_(nif_f)}, -1);
    return reduce_(joined);
  }

  // Full feature path, returns [batch, length, out].
  Tensor<T> operator()(const FeatureBatch& fb) const {
    const std::size_t rows = fb.rows();
    std::vector<T> deltas(fb.deltas.begin(), fb.deltas.end());
    std::vector<T> edge(fb.edge_feats.begin(), fb.edge_feats.end());
    std::vector<T> nif(fb.nif.begin(), fb.nif.end());
    const auto time_f = encode_time(Tensor<T>::from_data({rows}, std::move(deltas)));
    const auto nif_f = encode_nif(Tensor<T>::from_data({rows, 2}, std::move(nif)));
    const auto edge_f = Tensor<T>::from_data({rows, fb.edge_dim}, std::move(edge));
    const auto node_f = Tensor<T>::zeros({rows, dims_.align});
    const auto x = fuse(node_f, edge_f, time_f, nif_f);
    return reshape(x, {fb.batch, fb.length, dims_.out});
  }

  const FeatureDims& dims() const { return dims_; }
  const TimeEncoder<T>& time_encoder() const { return time_; }

 private:
  FeatureDims dims_;
  TimeEncoder<T> time_;
  Mlp<T> nif_;
  Linear<T> align_node_;
  Linear<T> align_edge_;
  Linear<T> align_time_;
  Linear<T> align_nif_;
  Linear<T> reduce_;
};

}  // namespace tfwf
