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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "tfwf/synth.hpp"
#include "tfwf/temporal_graph.hpp"

namespace {

using tfwf::EventStore;
using tfwf::TemporalEvent;

EventStore parse(const std::string& text) {
  std::istringstream in(text);
  return tfwf::parse_events_csv(in);
}

EventStore random_store(std::size_t num_events, std::size_t num_nodes, std::uint64_t seed, std::size_t edge_dim = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> node(0, num_nodes - 1);
  std::uniform_int_distribution<int> step(0, 2);
  std::normal_distribution<float> feat;
  std::vector<TemporalEvent> events;
  double ts = 0;
  for (std::size_t i = 0; i < num_events; ++i) {
    ts += step(rng);  // repeated timestamps on purpose
    TemporalEvent e;
    e.src = node(rng);
    e.dst = node(rng);
    e.ts = ts;
    e.idx = i;
    for (std::size_t k = 0; k < edge_dim; ++k) e.edge_feat.push_back(feat(rng));
    events.push_back(e);
  }
  return EventStore::with_dense_ids(std::move(events), num_nodes);
}

TEST(IngestTest, ThreeLineFile) {
  const auto store = parse("src,dst,ts\na,b,1\nb,c,2\na,c,3\n");
  EXPECT_EQ(store.num_events(), 3u);
  EXPECT_EQ(store.num_nodes(), 3u);
  EXPECT_EQ(store.edge_dim(), 0u);
  EXPECT_EQ(store.original_ids(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(store.event(2).src, 0u);
  EXPECT_EQ(store.event(2).dst, 2u);
}

TEST(IngestTest, UnsortedTimestampsReportLine) {
  try {
    parse("src,dst,ts\n1,2,2\n2,3,1\n");
    FAIL() << "expected IngestError";
  } catch (const tfwf::IngestError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(IngestTest, RaggedRowsAreFormatErrors) {
  EXPECT_THROW(parse("src,dst,ts,label,feat_0,feat_1\n1,2,1,0,0.5\n"), tfwf::FormatError);
  EXPECT_THROW(parse("src,dst,ts,feat_0\n1,2,1,0.5,9\n"), tfwf::FormatError);
}

TEST(IngestTest, MalformedInputs) {
  EXPECT_THROW(parse(""), tfwf::FormatError);
  EXPECT_THROW(parse("u,v,t\n1,2,3\n"), tfwf::FormatError);
  EXPECT_THROW(parse("src,dst,ts,feat_1\n1,2,3,4\n"), tfwf::FormatError);
  EXPECT_THROW(parse("src,dst,ts\n1,2,abc\n"), tfwf::FormatError);
  EXPECT_THROW(parse("src,dst,ts\n1,,3\n"), tfwf::FormatError);
  EXPECT_THROW(tfwf::ingest_csv("/nonexistent/dir/events.csv"), tfwf::FormatError);
}

TEST(IngestTest, LabelsAndFeatures) {
  const auto store = parse("src,dst,ts,label,feat_0,feat_1\nx,y,1.5,1,0.25,-2\ny,y,1.5,0,1,2\n");
  EXPECT_EQ(store.edge_dim(), 2u);
  EXPECT_EQ(store.event(0).label, 1.0);
  EXPECT_EQ(store.event(0).edge_feat, (std::vector<float>{0.25f, -2.0f}));
  // Self-loops are kept as ordinary events.
  EXPECT_EQ(store.event(1).src, store.event(1).dst);
}

TEST(IngestTest, SyntheticRoundTrip) {
  tfwf::SyntheticSpec spec;
  spec.num_events = 300;
  spec.num_nodes = 20;
  const auto data = tfwf::generate_synthetic(spec);
  std::stringstream buf;
  tfwf::write_events_csv(data.store, buf);
  const auto back = tfwf::parse_events_csv(buf);
  ASSERT_EQ(back.num_events(), data.store.num_events());
  ASSERT_EQ(back.edge_dim(), data.store.edge_dim());
  const auto& a_ids = data.store.original_ids();
  const auto& b_ids = back.original_ids();
  for (std::size_t i = 0; i < back.num_events(); ++i) {
    const auto& a = data.store.event(i);
    const auto& b = back.event(i);
    EXPECT_EQ(a_ids[a.src], b_ids[b.src]);
    EXPECT_EQ(a_ids[a.dst], b_ids[b.dst]);
    EXPECT_EQ(a.ts, b.ts);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.edge_feat, b.edge_feat);
  }
  // A second pass is the identity on the text.
  std::stringstream again;
  tfwf::write_events_csv(back, again);
  std::stringstream first;
  tfwf::write_events_csv(data.store, first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(EventStoreTest, ConstructorValidates) {
  std::vector<TemporalEvent> events(2);
  events[0].ts = 2;
  events[1].ts = 1;
  EXPECT_THROW(EventStore::with_dense_ids(events, 2), tfwf::ContractError);
  events[1].ts = 3;
  events[1].dst = 5;
  EXPECT_THROW(EventStore::with_dense_ids(events, 2), tfwf::LookupError);
  events[1].dst = 0;
  events[1].edge_feat = {1.0f};
  EXPECT_THROW(EventStore::with_dense_ids(events, 2), tfwf::FormatError);
}

TEST(NeighborTest, NoHistoryIsAllPadding) {
  const auto store = parse("src,dst,ts,feat_0\na,b,5,1\n");
  const auto seq = store.recent_neighbors(0, 5.0, 4);
  EXPECT_EQ(seq.length(), 4u);
  EXPECT_EQ(seq.valid_count(), 0u);
  for (double t : seq.timestamps) EXPECT_EQ(t, 5.0);
  for (float f : seq.edge_feats) EXPECT_EQ(f, 0.0f);
}

TEST(NeighborTest, ExactlyLPriorEventsFillsSequence) {
  const auto store = parse("src,dst,ts\na,b,1\nc,a,2\na,d,3\na,b,9\n");
  const auto seq = store.recent_neighbors(0, 4.0, 3);
  EXPECT_EQ(seq.valid_count(), 3u);
  EXPECT_EQ(seq.neighbor_ids, (std::vector<tfwf::NodeId>{1, 2, 3}));
  EXPECT_EQ(seq.timestamps, (std::vector<double>{1, 2, 3}));
}

TEST(NeighborTest, UnknownNodeIsLookupError) {
  const auto store = parse("src,dst,ts\na,b,1\n");
  EXPECT_THROW(store.recent_neighbors(7, 2.0, 3), tfwf::LookupError);
  EXPECT_THROW(store.recent_neighbors(0, 2.0, 0), tfwf::ContractError);
}

// Oracle: scan every event, keep the ones touching `node` strictly before
// t, take the last L in chronological order.
TEST(NeighborTest, MatchesLinearScan) {
  const auto store = random_store(200, 15, 3);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> node(0, 14);
  std::uniform_real_distribution<double> when(store.min_ts(), store.max_ts() + 1);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  for (int q = 0; q < 50; ++q) {
    const auto v = node(rng);
    const double t = std::floor(when(rng));
    const auto length = len(rng);
    std::vector<std::pair<std::size_t, std::size_t>> hits;  // (ordinal, neighbor)
    for (std::size_t i = 0; i < store.num_events(); ++i) {
      const auto& e = store.event(i);
      if (e.ts >= t) continue;
      if (e.src == v) hits.emplace_back(i, e.dst);
      else if (e.dst == v) hits.emplace_back(i, e.src);
    }
    const std::size_t keep = std::min(length, hits.size());
    const auto seq = store.recent_neighbors(v, t, length);
    ASSERT_EQ(seq.length(), length);
    ASSERT_EQ(seq.valid_count(), keep);
    const std::size_t pad = length - keep;
    for (std::size_t s = 0; s < length; ++s) {
      if (s < pad) {
        EXPECT_EQ(seq.valid[s], 0);
        continue;
      }
      const auto& [ordinal, nb] = hits[hits.size() - keep + (s - pad)];
      EXPECT_EQ(seq.valid[s], 1);
      EXPECT_EQ(seq.neighbor_ids[s], nb);
      EXPECT_EQ(seq.timestamps[s], store.event(ordinal).ts);
      EXPECT_LT(seq.timestamps[s], t);
      for (std::size_t k = 0; k < store.edge_dim(); ++k)
        EXPECT_EQ(seq.edge_feats[s * store.edge_dim() + k], store.event(ordinal).edge_feat[k]);
    }
  }
}

TEST(SplitTest, HundredUniformEvents) {
  std::vector<TemporalEvent> events(100);
  for (std::size_t i = 0; i < 100; ++i) {
    events[i].ts = static_cast<double>(i + 1);
    events[i].src = i % 10;
    events[i].dst = (i + 3) % 10;
  }
  const auto store = EventStore::with_dense_ids(events, 10);
  const auto split = tfwf::make_split(store, 0.70, 0.15, 0.0, 1);
  EXPECT_EQ(split.train_end_ts, 70.0);
  EXPECT_EQ(split.val_end_ts, 85.0);
  EXPECT_TRUE(split.unseen_nodes.empty());
  EXPECT_EQ(split.mode, tfwf::Setting::kTransductive);
  const auto p = tfwf::partition(store, split);
  EXPECT_EQ(p.train.size(), 70u);
  EXPECT_EQ(p.val.size(), 15u);
  EXPECT_EQ(p.test.size(), 15u);
}

// Oracle: sort timestamps, boundaries at the floor(0.70 n)-th and
// floor(0.85 n)-th event, ties sent to the earlier partition.
TEST(SplitTest, CountsMatchPercentileOracle) {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    const auto store = random_store(237, 12, seed, 0);
    std::vector<double> ts;
    for (const auto& e : store.events()) ts.push_back(e.ts);
    std::sort(ts.begin(), ts.end());
    const double b1 = ts[static_cast<std::size_t>(0.70 * 237) - 1];
    const double b2 = ts[static_cast<std::size_t>(0.85 * 237) - 1];
    const auto n_train = static_cast<std::size_t>(std::count_if(ts.begin(), ts.end(), [&](double t) { return t <= b1; }));
    const auto n_val =
        static_cast<std::size_t>(std::count_if(ts.begin(), ts.end(), [&](double t) { return t > b1 && t <= b2; }));
    const auto p = tfwf::partition(store, tfwf::make_split(store, 0.70, 0.15, 0.0, 1));
    EXPECT_EQ(p.train.size(), n_train);
    EXPECT_EQ(p.val.size(), n_val);
    EXPECT_EQ(p.test.size(), 237 - n_train - n_val);
  }
}

TEST(SplitTest, EveryEventInExactlyOnePartition) {
  const auto store = random_store(300, 20, 8, 0);
  for (double frac : {0.0, 0.1, 0.3}) {
    const auto split = tfwf::make_split(store, 0.70, 0.15, frac, 9);
    const auto p = tfwf::partition(store, split);
    std::vector<int> seen(store.num_events(), 0);
    for (auto* part : {&p.train, &p.val, &p.test, &p.removed_train})
      for (auto i : *part) ++seen[i];
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_LE(split.train_end_ts, split.val_end_ts);
  }
}

TEST(SplitTest, InductiveMasksNodes) {
  const auto store = random_store(400, 30, 10, 0);
  const auto split = tfwf::make_split(store, 0.70, 0.15, 0.1, 11);
  EXPECT_EQ(split.mode, tfwf::Setting::kInductive);
  EXPECT_EQ(split.unseen_nodes.size(), 3u);
  EXPECT_TRUE(std::is_sorted(split.unseen_nodes.begin(), split.unseen_nodes.end()));
  const auto p = tfwf::partition(store, split);
  for (auto i : p.train) {
    EXPECT_FALSE(split.is_unseen(store.event(i).src));
    EXPECT_FALSE(split.is_unseen(store.event(i).dst));
  }
  for (auto i : p.inductive_test) {
    const auto& e = store.event(i);
    EXPECT_TRUE(split.is_unseen(e.src) || split.is_unseen(e.dst));
    EXPECT_GT(e.ts, split.val_end_ts);
  }
  // Same seed, same nodes.
  EXPECT_EQ(tfwf::make_split(store, 0.70, 0.15, 0.1, 11).unseen_nodes, split.unseen_nodes);
}

TEST(SplitTest, Errors) {
  EXPECT_THROW(tfwf::make_split(EventStore(), 0.7, 0.15, 0.0, 1), tfwf::ContractError);
  const auto store = random_store(10, 4, 1, 0);
  EXPECT_THROW(tfwf::make_split(store, 0.9, 0.2, 0.0, 1), tfwf::ContractError);
  EXPECT_THROW(tfwf::make_split(store, 0.7, 0.15, 1.5, 1), tfwf::ContractError);
}

}  // namespace
