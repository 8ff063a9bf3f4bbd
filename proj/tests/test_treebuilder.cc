/*
 * Copyright 2026 The DRF Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include "drf/oracle.h"
#include "drf/synth.h"
#include "drf/treebuilder.h"
#include "test_util.h"

using namespace drf;
using drf::testing::numeric_dataset;
using drf::testing::sorted;
using drf::testing::train_inproc;

TEST_CASE("closure rules") {
  TrainConfig cfg;
  cfg.min_records = 10;
  cfg.max_depth = 20;
  CHECK(close_reason(LabelHistogram{10, 0}, 3, true, cfg) == LeafReason::kPure);
  CHECK(close_reason(LabelHistogram{4, 3}, 3, true, cfg) == LeafReason::kTooSmall);
  CHECK(close_reason(LabelHistogram{6, 6}, 3, true, cfg) == LeafReason::kInternal);
  CHECK(close_reason(LabelHistogram{6, 6}, 20, true, cfg) == LeafReason::kMaxDepth);
  CHECK(close_reason(LabelHistogram{6, 6}, 3, false, cfg) == LeafReason::kNoGain);
  cfg.max_depth = -1;
  CHECK(close_reason(LabelHistogram{6, 6}, 500, true, cfg) == LeafReason::kInternal);
  // Pure wins over every other reason.
  CHECK(close_reason(LabelHistogram{0, 2}, 500, false, cfg) == LeafReason::kPure);
}

TEST_CASE("pruning switch rule") {
  CHECK(drfp_switch_check(0.1, 3.0, 10, 2, 4));
  CHECK_FALSE(drfp_switch_check(0.9, 3.0, 10, 2, 4));
  // 0.1*10 + 0.9*3 = 3.7 and 0.9*10 + 0.1*3 = 9.3 against 2*10/4 = 5.
  for (std::uint32_t i = 1; i < 30; ++i) {
    for (std::uint32_t z = 1; z <= 4; ++z) CHECK_FALSE(drfp_switch_check(1.0, 0.0, i, z, 4));
  }
  CHECK_FALSE(drfp_switch_check(0.0, 0.0, 0, 5, 1));
  DepthStats s;
  s.depth = 10;
  s.open_fraction = 0.1;
  s.mean_closed_depth = 3.0;
  s.max_worker_features = 2;
  CHECK(drfp_switch_check(s, 4));
}

TEST_CASE("constant labels give a single pure leaf") {
  auto ds = sorted(numeric_dataset({{1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}}, {1, 1, 1, 1, 1}));
  TrainConfig cfg;
  cfg.num_trees = 2;
  const auto result = train_inproc(ds, cfg, 2);
  for (const auto& tree : result.forest.trees) {
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.root().reason == LeafReason::kPure);
  }
  CHECK(result.metrics[0].levels == 0);
}

TEST_CASE("four-point xor") {
  auto ds = sorted(numeric_dataset({{0, 0, 1, 1}, {0, 1, 0, 1}}, {0, 1, 1, 0}));
  TrainConfig cfg;
  cfg.m_prime = 2;
  cfg.num_trees = 1;
  // Trees whose bag holds all four points with unequal multiplicities split
  // twice and fit the training points.
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 200 && checked < 5; ++seed) {
    cfg.seed = seed;
    const auto ctx = SeedContext::make(seed);
    bool all = true;
    for (SampleIndex i = 0; i < 4; ++i) all = all && bag(i, 0, ctx) > 0;
    if (!all) continue;
    const auto result = train_inproc(ds, cfg, 2);
    const auto& tree = result.forest.trees[0];
    CHECK(forests_equal(result.forest, train_reference_forest(*ds, cfg, ctx)).equal);
    if (tree.root().is_leaf()) continue;
    ++checked;
    CHECK(tree.depth() == 2);
    const FeatureTable rows(*ds);
    for (SampleIndex i = 0; i < 4; ++i) {
      CHECK(tree.route(rows, i).distribution.argmax() == ds->labels[i]);
    }
  }
  CHECK(checked == 5);
}

TEST_CASE("engine equals the reference on n=500, m=8 for several worker counts") {
  auto ds = sorted(random_dataset(77, CorpusShape{500, 500, 8}));
  TrainConfig cfg;
  cfg.num_trees = 3;
  cfg.seed = 3;
  const Forest reference = train_reference_forest(*ds, cfg, SeedContext::make(cfg.seed));
  for (std::uint32_t w : {1u, 2u, 5u, static_cast<std::uint32_t>(ds->m())}) {
    const auto result = train_inproc(ds, cfg, w);
    const auto cmp = forests_equal(result.forest, reference);
    INFO("w=", w, " ", cmp.divergence);
    CHECK(cmp.equal);
  }
}

TEST_CASE("pruning on and off give identical trees") {
  for (std::uint64_t seed : {4ull, 15ull, 23ull}) {
    auto ds = sorted(random_dataset(seed));
    TrainConfig cfg;
    cfg.num_trees = 2;
    cfg.seed = seed;
    cfg.pruning = PruningMode::kOff;
    const auto off = train_inproc(ds, cfg, 3);
    cfg.pruning = PruningMode::kOn;
    const auto on = train_inproc(ds, cfg, 3);
    cfg.pruning = PruningMode::kAuto;
    const auto autom = train_inproc(ds, cfg, 3);
    CHECK(forests_equal(off.forest, on.forest).equal);
    CHECK(forests_equal(off.forest, autom.forest).equal);
    for (const auto& s : off.splitter_stats) CHECK(s.write_bytes == 0);
    CHECK(on.metrics[0].entered_pruning);
  }
}

TEST_CASE("pruned copies hold exactly the bagged samples of open leaves") {
  // All-numerical, one worker: each re-filter writes one entry per open
  // bagged sample and column.
  auto ds = sorted(numeric_dataset({{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8},
                                    {2, 7, 1, 8, 2, 8, 1, 8, 2, 8, 4, 5}},
                                   {0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 1, 0}));
  TrainConfig cfg;
  cfg.num_trees = 1;
  cfg.m_prime = 2;
  cfg.pruning = PruningMode::kOn;
  const auto result = train_inproc(ds, cfg, 1);
  const auto& tree = result.forest.trees[0];
  std::uint64_t entries = 0;
  const auto bags = bag_column(ds->n(), 0, result.seed);
  std::uint64_t bagged = 0;
  for (auto b : bags) bagged += b > 0;
  for (const auto& s : tree.depth_stats) entries += s.bagged_open_samples;
  // The first copy is the whole bag; later ones follow each depth's update.
  CHECK(tree.depth_stats.front().bagged_open_samples == bagged);
  CHECK(result.splitter_stats[0].write_bytes == entries * 2 * sizeof(NumericalEntry));
}

TEST_CASE("tree metrics") {
  auto ds = sorted(random_dataset(31));
  TrainConfig cfg;
  cfg.num_trees = 3;
  const auto result = train_inproc(ds, cfg, 4);
  for (const auto& m : result.metrics) {
    const auto& tree = result.forest.trees[m.tree];
    CHECK(m.levels == tree.depth_stats.size());
    CHECK(m.supersplit_rounds == m.levels);
    CHECK(m.broadcast_rounds == m.levels);
    CHECK(m.evaluation_rounds <= m.levels);
    CHECK(tree.depth() <= m.levels);
    CHECK(m.levels <= tree.depth() + 1);
    CHECK(m.bitmap_bits <= m.bagged_open_total + 64 * m.levels);
    CHECK(m.bitmap_wire_bits >= m.bitmap_bits);
    CHECK(m.classlist_bits == m.classlist_expected_bits);
    CHECK(m.classlist_bits.size() == m.levels + 1);
    REQUIRE(m.dispatch.size() == m.levels);
    for (std::size_t i = 0; i < m.levels; ++i) {
      const auto& d = m.dispatch[i];
      CHECK(d.features.size() == tree.depth_stats[i].drawn_features);
      std::vector<std::uint32_t> load(4, 0);
      for (auto w : d.workers) ++load[w];
      CHECK(*std::max_element(load.begin(), load.end()) == tree.depth_stats[i].max_worker_features);
    }
  }
}

TEST_CASE("metrics encoding round-trips") {
  TreeMetrics m;
  m.tree = 3;
  m.levels = 2;
  m.supersplit_rounds = 2;
  m.broadcast_rounds = 2;
  m.evaluation_rounds = 1;
  m.bitmap_bits = 99;
  m.bitmap_wire_bits = 104;
  m.classlist_bits = {0, 64, 128};
  m.classlist_expected_bits = {0, 64, 128};
  m.dispatch = {DepthDispatch{0, {1, 2}, {0, 1}}};
  m.entered_pruning = true;
  const auto bytes = encode_metrics(m);
  ByteReader r(bytes);
  const TreeMetrics back = decode_metrics(r);
  CHECK(back.tree == 3);
  CHECK(back.bitmap_bits == 99);
  CHECK(back.classlist_bits == m.classlist_bits);
  REQUIRE(back.dispatch.size() == 1);
  CHECK(back.dispatch[0].features == m.dispatch[0].features);
  CHECK(back.entered_pruning);
}

TEST_CASE("max depth and min records are honored") {
  auto ds = sorted(random_dataset(12, CorpusShape{1500, 1500, 10}));
  TrainConfig cfg;
  cfg.num_trees = 2;
  cfg.max_depth = 3;
  cfg.min_records = 20;
  const auto result = train_inproc(ds, cfg, 2);
  CHECK(forests_equal(result.forest, train_reference_forest(*ds, cfg, result.seed)).equal);
  for (const auto& tree : result.forest.trees) {
    CHECK(tree.depth() <= 3);
    for (const auto& node : tree.nodes) {
      if (node.id != 0) CHECK(node.distribution.total >= 20);
      if (node.reason == LeafReason::kMaxDepth) CHECK(node.depth == 3);
    }
  }
}
