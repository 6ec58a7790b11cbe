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

#include <cstdio>
#include <fstream>

#include "tfwf/checkpoint.hpp"
#include "tfwf/gradcheck.hpp"

namespace {

using tfwf::Checkpoint;
using tfwf::TFWaveFormer;

struct Fixture {
  tfwf::EventStore store = tfwf::gradcheck_store(3);
  tfwf::RunConfig cfg = [] {
    tfwf::RunConfig c;
    c.model = tfwf::gradcheck_config();
    return c;
  }();
};

tfwf::FeatureBatch some_features(const tfwf::EventStore& store, std::size_t len) {
  std::vector<tfwf::Query> queries;
  for (std::size_t i = store.num_events() - 6; i < store.num_events(); ++i) {
    const auto& e = store.event(i);
    queries.push_back({e.src, e.dst, e.ts});
    queries.push_back({e.dst, e.src, e.ts});
  }
  return tfwf::build_features(store, queries, len, true);
}

// One optimizer step so the moments and step count are non-trivial.
void take_step(TFWaveFormer<float>& model, tfwf::Adam<float>& opt, const tfwf::EventStore& store) {
  const auto fb = some_features(store, model.config().seq_len);
  auto loss = tfwf::mean(model.forward(fb).pooled);
  model.params().zero_grad();
  tfwf::backward(loss);
  opt.step();
}

TEST(CheckpointTest, SerializeRoundTripIsExact) {
  Fixture f;
  TFWaveFormer<float> model(f.cfg.model, f.store.edge_dim(), 5);
  tfwf::Adam<float> opt(model.params(), {});
  take_step(model, opt, f.store);
  const auto ckpt = tfwf::make_checkpoint(model, f.cfg, &opt, &model.rng());
  const auto bytes = tfwf::serialize_checkpoint(ckpt);
  const auto back = tfwf::deserialize_checkpoint(bytes);
  EXPECT_EQ(back, ckpt);
  EXPECT_EQ(tfwf::serialize_checkpoint(back), bytes);
  EXPECT_NE(ckpt.find("adam.m/score.w"), nullptr);
  EXPECT_NE(ckpt.find("meta.rng"), nullptr);
}

TEST(CheckpointTest, RestoreGivesIdenticalStateAndOutputs) {
  Fixture f;
  TFWaveFormer<float> a(f.cfg.model, f.store.edge_dim(), 5);
  tfwf::Adam<float> opt_a(a.params(), {});
  take_step(a, opt_a, f.store);
  a.rng().discard(17);
  const std::string path = ::testing::TempDir() + "tfwf_ckpt_test.bin";
  tfwf::write_checkpoint(tfwf::make_checkpoint(a, f.cfg, &opt_a, &a.rng()), path);

  const auto loaded = tfwf::read_checkpoint(path);
  const auto cfg = tfwf::config_from_checkpoint(loaded);
  EXPECT_EQ(cfg.to_text(), f.cfg.to_text());
  EXPECT_EQ(tfwf::edge_dim_from_checkpoint(loaded), f.store.edge_dim());
  TFWaveFormer<float> b(cfg.model, tfwf::edge_dim_from_checkpoint(loaded), 99);
  tfwf::Adam<float> opt_b(b.params(), {});
  tfwf::restore_checkpoint(loaded, b, &opt_b, &b.rng());

  const auto& pa = a.params().all();
  const auto& pb = b.params().all();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t k = 0; k < pa.size(); ++k) {
    ASSERT_EQ(pa[k].name, pb[k].name);
    const auto da = pa[k].value.data(), db = pb[k].value.data();
    EXPECT_TRUE(std::equal(da.begin(), da.end(), db.begin(), db.end())) << pa[k].name;
    EXPECT_EQ(opt_a.first_moments()[k], opt_b.first_moments()[k]);
    EXPECT_EQ(opt_a.second_moments()[k], opt_b.second_moments()[k]);
  }
  EXPECT_EQ(opt_b.steps(), 1u);
  EXPECT_EQ(a.rng(), b.rng());

  const auto fb = some_features(f.store, cfg.model.seq_len);
  const auto ya = a.forward(fb).pooled, yb = b.forward(fb).pooled;
  const auto da = ya.data(), db = yb.data();
  EXPECT_TRUE(std::equal(da.begin(), da.end(), db.begin(), db.end()));

  // Re-saving the restored state reproduces the file byte for byte.
  EXPECT_EQ(tfwf::serialize_checkpoint(tfwf::make_checkpoint(b, cfg, &opt_b, &b.rng())),
            tfwf::serialize_checkpoint(loaded));
  std::remove(path.c_str());
}

TEST(CheckpointTest, CorruptMagicIsFormatError) {
  Fixture f;
  TFWaveFormer<float> model(f.cfg.model, f.store.edge_dim(), 5);
  auto bytes = tfwf::serialize_checkpoint(tfwf::make_checkpoint(model, f.cfg));
  bytes[1] = 'X';
  EXPECT_THROW(tfwf::deserialize_checkpoint(bytes), tfwf::FormatError);
  EXPECT_THROW(tfwf::deserialize_checkpoint("TFW"), tfwf::FormatError);
}

TEST(CheckpointTest, VersionMismatchNamesBothVersions) {
  Fixture f;
  TFWaveFormer<float> model(f.cfg.model, f.store.edge_dim(), 5);
  auto bytes = tfwf::serialize_checkpoint(tfwf::make_checkpoint(model, f.cfg));
  bytes[4] = 7;
  try {
    tfwf::deserialize_checkpoint(bytes);
    FAIL() << "expected LoadError";
  } catch (const tfwf::LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('7'), std::string::npos) << msg;
    EXPECT_NE(msg.find(std::to_string(tfwf::kCheckpointVersion)), std::string::npos) << msg;
  }
}

TEST(CheckpointTest, TruncationIsFormatError) {
  Fixture f;
  TFWaveFormer<float> model(f.cfg.model, f.store.edge_dim(), 5);
  const auto bytes = tfwf::serialize_checkpoint(tfwf::make_checkpoint(model, f.cfg));
  for (std::size_t cut : {std::size_t{7}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(tfwf::deserialize_checkpoint(bytes.substr(0, cut)), tfwf::FormatError) << cut;
  }
}

TEST(CheckpointTest, ShapeMismatchIsLoadError) {
  Fixture f;
  TFWaveFormer<float> small(f.cfg.model, f.store.edge_dim(), 5);
  const auto ckpt = tfwf::make_checkpoint(small, f.cfg);
  auto wide = f.cfg.model;
  wide.dim = 12;
  TFWaveFormer<float> other(wide, f.store.edge_dim(), 5);
  try {
    tfwf::restore_checkpoint(ckpt, other);
    FAIL() << "expected LoadError";
  } catch (const tfwf::LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos);
  }
  Checkpoint empty;
  EXPECT_THROW(tfwf::restore_checkpoint(empty, small), tfwf::LoadError);
  EXPECT_THROW(tfwf::config_from_checkpoint(empty), tfwf::LoadError);
}

TEST(CheckpointTest, MissingFileIsFormatError) {
  EXPECT_THROW(tfwf::read_checkpoint("/nonexistent/model.ckpt"), tfwf::FormatError);
}

}  // namespace
