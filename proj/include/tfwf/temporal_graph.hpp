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

// Chronological interaction store with a per-node neighbor index, CSV
// ingestion, and the chronological / inductive split.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tfwf/errors.hpp"

namespace tfwf {

using NodeId = std::size_t;

struct TemporalEvent {
  NodeId src = 0;
  NodeId dst = 0;
  double ts = 0.0;
  std::vector<float> edge_feat;
  double label = 0.0;
  std::size_t idx = 0;

  friend bool operator==(const TemporalEvent&, const TemporalEvent&) = default;
};

// The `length` most recent interactions of a node strictly before
// `query_time`, left-padded. Padding slots hold neighbor 0, zero features,
// timestamp == query_time and valid == 0.
struct NeighborSequence {
  double query_time = 0.0;
  std::size_t edge_dim = 0;
  std::vector<NodeId> neighbor_ids;
  std::vector<float> edge_feats;  // length x edge_dim
  std::vector<double> timestamps;
  std::vector<std::uint8_t> valid;

  std::size_t length() const { return neighbor_ids.size(); }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
};

class EventStore {
 public:
  struct Adjacency {
    double ts;
    std::size_t event;
    NodeId neighbor;
  };

  EventStore() = default;

  // `original_ids[i]` is the external label of dense node i. Events must be
  // sorted by non-decreasing ts and share one feature width.
  EventStore(std::vector<TemporalEvent> events, std::vector<std::string> original_ids)
      : events_(std::move(events)), original_ids_(std::move(original_ids)) {
    edge_dim_ = events_.empty() ? 0 : events_.front().edge_feat.size();
    adjacency_.resize(original_ids_.size());
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const auto& e = events_[i];
      if (i > 0 && e.ts < events_[i - 1].ts) {
        throw ContractError("events not sorted by timestamp at ordinal " + std::to_string(i));
      }
      if (e.edge_feat.size() != edge_dim_) {
        throw FormatError("event " + std::to_string(i) + " has " + std::to_string(e.edge_feat.size()) +
                          " edge features, expected " + std::to_string(edge_dim_));
      }
      if (e.src >= original_ids_.size() || e.dst >= original_ids_.size()) {
        throw LookupError("event " + std::to_string(i) + " references an unknown node");
      }
      adjacency_[e.src].push_back({e.ts, i, e.dst});
      if (e.dst != e.src) adjacency_[e.dst].push_back({e.ts, i, e.src});
    }
  }

  // Store over `num_nodes` nodes labelled "0".."num_nodes-1".
  static EventStore with_dense_ids(std::vector<TemporalEvent> events, std::size_t num_nodes) {
    std::vector<std::string> ids(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) ids[i] = std::to_string(i);
    return EventStore(std::move(events), std::move(ids));
  }

  // Same node id space, only the events whose ordinal is listed.
  EventStore subset(const std::vector<std::size_t>& ordinals) const {
    std::vector<TemporalEvent> kept;
    kept.reserve(ordinals.size());
    for (std::size_t o : ordinals) kept.push_back(events_.at(o));
    return EventStore(std::move(kept), original_ids_);
  }

  std::size_t num_events() const { return events_.size(); }
  std::size_t num_nodes() const { return original_ids_.size(); }
  std::size_t edge_dim() const { return edge_dim_; }
  const std::vector<TemporalEvent>& events() const { return events_; }
  const TemporalEvent& event(std::size_t i) const { return events_.at(i); }
  const std::vector<std::string>& original_ids() const { return original_ids_; }
  const std::vector<Adjacency>& adjacency(NodeId node) const {
    check_node(node);
    return adjacency_[node];
  }
  double min_ts() const { return events_.empty() ? 0.0 : events_.front().ts; }
  double max_ts() const { return events_.empty() ? 0.0 : events_.back().ts; }

  NeighborSequence recent_neighbors(NodeId node, double t, std::size_t length) const {
    check_node(node);
    if (length == 0) throw ContractError("recent_neighbors: length must be >= 1");
    const auto& adj = adjacency_[node];
    const auto first_not_before =
        std::lower_bound(adj.begin(), adj.end(), t, [](const Adjacency& a, double q) { return a.ts < q; });
    const std::size_t end = static_cast<std::size_t>(first_not_before - adj.begin());
    const std::size_t count = std::min(end, length);
    const std::size_t pad = length - count;

    NeighborSequence seq;
    seq.query_time = t;
    seq.edge_dim = edge_dim_;
    seq.neighbor_ids.assign(length, 0);
    seq.edge_feats.assign(length * edge_dim_, 0.0f);
    seq.timestamps.assign(length, t);
    seq.valid.assign(length, 0);
    for (std::size_t s = 0; s < count; ++s) {
      const auto& a = adj[end - count + s];
      const std::size_t slot = pad + s;
      seq.neighbor_ids[slot] = a.neighbor;
      seq.timestamps[slot] = a.ts;
      seq.valid[slot] = 1;
      const auto& f = events_[a.event].edge_feat;
      std::copy(f.begin(), f.end(), seq.edge_feats.begin() + static_cast<std::ptrdiff_t>(slot * edge_dim_));
    }
    return seq;
  }

 private:
  void check_node(NodeId node) const {
    if (node >= original_ids_.size()) {
      throw LookupError("unknown node id " + std::to_string(node) + " (store has " +
                        std::to_string(original_ids_.size()) + " nodes)");
    }
  }

  std::vector<TemporalEvent> events_;
  std::vector<std::string> original_ids_;
  std::size_t edge_dim_ = 0;
  std::vector<std::vector<Adjacency>> adjacency_;
};

// ---------------------------------------------------------------------------
// CSV: header `src,dst,ts[,label][,feat_0..feat_{k-1}]`.

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

inline double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw FormatError("line " + std::to_string(line) + ": cannot parse number '" + std::string(field) + "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline EventStore parse_events_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty CSV: missing header row");
  ++line_no;
  const auto header = detail::split_fields(line);
  if (header.size() < 3 || header[0] != "src" || header[1] != "dst" || header[2] != "ts") {
    throw FormatError("CSV header must start with src,dst,ts");
  }
  std::size_t col = 3;
  bool has_label = false;
  if (header.size() > 3 && header[3] == "label") {
    has_label = true;
    ++col;
  }
  const std::size_t feat_begin = col;
  for (; col < header.size(); ++col) {
    if (header[col] != "feat_" + std::to_string(col - feat_begin)) {
      throw FormatError("unexpected CSV header column '" + std::string(header[col]) + "'");
    }
  }
  const std::size_t num_feats = header.size() - feat_begin;

  std::unordered_map<std::string, NodeId> dense;
  std::vector<std::string> original;
  const auto intern = [&](std::string_view raw) {
    std::string key(raw);
    auto [it, inserted] = dense.emplace(key, original.size());
    if (inserted) original.push_back(std::move(key));
    return it->second;
  };

  std::vector<TemporalEvent> events;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    TemporalEvent e;
    if (fields[0].empty() || fields[1].empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": empty node id");
    }
    e.src = intern(fields[0]);
    e.dst = intern(fields[1]);
    e.ts = detail::parse_double(fields[2], line_no);
    if (!std::isfinite(e.ts)) throw FormatError("line " + std::to_string(line_no) + ": non-finite timestamp");
    if (has_label) e.label = detail::parse_double(fields[3], line_no);
    e.edge_feat.resize(num_feats);
    for (std::size_t k = 0; k < num_feats; ++k)
      e.edge_feat[k] = static_cast<float>(detail::parse_double(fields[feat_begin + k], line_no));
    if (!events.empty() && e.ts < events.back().ts) {
      throw IngestError("timestamps not in non-decreasing order", line_no);
    }
    e.idx = events.size();
    events.push_back(std::move(e));
  }
  return EventStore(std::move(events), std::move(original));
}

inline EventStore ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return parse_events_csv(in);
}

inline void write_events_csv(const EventStore& store, std::ostream& out) {
  out << "src,dst,ts,label";
  for (std::size_t k = 0; k < store.edge_dim(); ++k) out << ",feat_" << k;
  out << '\n';
  const auto& ids = store.original_ids();
  for (const auto& e : store.events()) {
    out << ids[e.src] << ',' << ids[e.dst] << ',' << detail::format_double(e.ts) << ','
        << detail::format_double(e.label);
    for (float f : e.edge_feat) out << ',' << detail::format_double(static_cast<double>(f));
    out << '\n';
  }
}

inline void emit_csv(const EventStore& store, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  write_events_csv(store, out);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Splits.

enum class Setting { kTransductive, kInductive };

struct SplitSpec {
  double train_end_ts = 0.0;
  double val_end_ts = 0.0;
  std::vector<NodeId> unseen_nodes;  // sorted
  Setting mode = Setting::kTransductive;

  bool is_unseen(NodeId n) const { return std::binary_search(unseen_nodes.begin(), unseen_nodes.end(), n); }
};

// Event ordinals per partition. In inductive mode `train` excludes every
// event touching an unseen node, and the inductive_* lists hold the
// val/test events that touch one.
struct Partition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::vector<std::size_t> inductive_val;
  std::vector<std::size_t> inductive_test;
  std::vector<std::size_t> removed_train;
};

namespace detail {

inline std::size_t fraction_count(double fraction, std::size_t n, bool round_up) {
  const double raw = fraction * static_cast<double>(n);
  const double eps = 1e-9 * std::max(1.0, raw);
  return static_cast<std::size_t>(round_up ? std::ceil(raw - eps) : std::floor(raw + eps));
}

}  // namespace detail

inline SplitSpec make_split(const EventStore& store, double train_fraction, double val_fraction,
                            double inductive_fraction, std::uint64_t seed) {
  if (store.num_events() == 0) throw ContractError("make_split: empty store");
  if (train_fraction < 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0 + 1e-12) {
    throw ContractError("make_split: fractions must be non-negative and sum to <= 1");
  }
  if (inductive_fraction < 0 || inductive_fraction > 1) {
    throw ContractError("make_split: inductive fraction must lie in [0, 1]");
  }
  const std::size_t n = store.num_events();
  const auto boundary = [&](double fraction) {
    const std::size_t count = detail::fraction_count(fraction, n, false);
    if (count == 0) return -std::numeric_limits<double>::infinity();
    return store.event(std::min(count, n) - 1).ts;
  };
  SplitSpec split;
  split.train_end_ts = boundary(train_fraction);
  split.val_end_ts = std::max(split.train_end_ts, boundary(train_fraction + val_fraction));
  if (inductive_fraction > 0) {
    split.mode = Setting::kInductive;
    const std::size_t k = detail::fraction_count(inductive_fraction, store.num_nodes(), true);
    std::vector<NodeId> nodes(store.num_nodes());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    nodes.resize(std::min(k, nodes.size()));
    std::sort(nodes.begin(), nodes.end());
    split.unseen_nodes = std::move(nodes);
  }
  return split;
}

inline Partition partition(const EventStore& store, const SplitSpec& split) {
  Partition p;
  for (std::size_t i = 0; i < store.num_events(); ++i) {
    const auto& e = store.event(i);
    const bool touches_unseen = split.is_unseen(e.src) || split.is_unseen(e.dst);
    if (e.ts <= split.train_end_ts) {
      (touches_unseen ? p.removed_train : p.train).push_back(i);
    } else if (e.ts <= split.val_end_ts) {
      p.val.push_back(i);
      if (touches_unseen) p.inductive_val.push_back(i);
    } else {
      p.test.push_back(i);
      if (touches_unseen) p.inductive_test.push_back(i);
    }
  }
  return p;
}

}  // namespace tfwf
