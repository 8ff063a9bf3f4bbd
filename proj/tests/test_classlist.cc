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

#include <sstream>

#include "drf/classlist.h"
#include "drf/config.h"
#include "drf/oracle.h"
#include "drf/seeding.h"
#include "drf/synth.h"
#include "test_util.h"

using namespace drf;
using drf::testing::error_of;

namespace {

ConditionBitmap bits(std::initializer_list<int> values) {
  ConditionBitmap b;
  for (int v : values) b.push_back(v != 0);
  return b;
}

bool holds(const TreeNode& node, const FeatureTable& rows, SampleIndex i) {
  if (const auto* c = std::get_if<NumericalCondition>(&node.condition)) {
    return numerical_holds(*c, rows.numerical(i, node.feature));
  }
  return categorical_holds(std::get<CategoricalCondition>(node.condition),
                           rows.categorical(i, node.feature));
}

// Node on the routing path of row i at `depth`, or kNoNode past its leaf.
NodeId node_at_depth(const DecisionTree& tree, const FeatureTable& rows, SampleIndex i,
                     std::uint32_t depth) {
  NodeId id = 0;
  for (std::uint32_t d = 0; d < depth; ++d) {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) return kNoNode;
    id = holds(node, rows, i) ? node.positive : node.negative;
  }
  return id;
}

// Replays a finished tree depth by depth through a class list and checks
// every sample mapping against routing through the tree's conditions.
void replay(const PreparedDataset& ds, const DecisionTree& tree, const SeedContext& ctx,
            std::size_t chunk) {
  const FeatureTable rows(ds);
  const auto bags = bag_column(ds.n(), tree.index, ctx);
  ClassList cl = ClassList::init_root(ds.n(), 0, chunk);
  auto open = [&](NodeId id) {
    const auto& node = tree.nodes[id];
    return !node.is_leaf() || node.reason == LeafReason::kNoGain;
  };
  if (!open(0)) {
    cl.apply_depth_update(DepthUpdate{{}, {0}}, bags, ConditionBitmap());
    CHECK(cl.active_leaves() == 0);
    return;
  }
  for (std::uint32_t depth = 0; depth <= tree.depth(); ++depth) {
    DepthUpdate update;
    for (const auto& node : tree.nodes) {
      if (node.depth != depth || !open(node.id)) continue;
      if (node.is_leaf()) {
        update.closures.push_back(node.id);
        continue;
      }
      update.splits.push_back({node.id, node.positive, node.negative});
      for (NodeId child : {node.positive, node.negative}) {
        if (!open(child)) update.closures.push_back(child);
      }
    }
    if (update.splits.empty() && update.closures.empty()) break;
    ConditionBitmap bitmap;
    for (SampleIndex i = 0; i < ds.n(); ++i) {
      if (bags[i] == 0) continue;
      const auto leaf = cl.leaf_of(i);
      if (!leaf || tree.nodes[*leaf].is_leaf()) continue;
      bitmap.push_back(holds(tree.nodes[*leaf], rows, i));
    }
    cl.apply_depth_update(update, bags, bitmap);
    for (SampleIndex i = 0; i < ds.n(); ++i) {
      const NodeId expected = node_at_depth(tree, rows, i, depth + 1);
      const bool active = bags[i] > 0 && expected != kNoNode && open(expected);
      const auto got = cl.leaf_of(i);
      if (active) {
        REQUIRE(got.has_value());
        CHECK(*got == expected);
      } else {
        CHECK_FALSE(got.has_value());
      }
    }
    const std::size_t width = entry_width(cl.active_leaves(), cl.has_closed());
    CHECK(cl.width() == width);
    if (chunk == 0) CHECK(cl.storage_bits() == (ds.n() * width + 63) / 64 * 64);
  }
}

}  // namespace

TEST_CASE("entry width") {
  CHECK(entry_width(1, false) == 0);
  CHECK(entry_width(3, true) == 2);
  CHECK(entry_width(1024, true) == 11);
  CHECK(entry_width(2, false) == 1);
  CHECK(entry_width(4, false) == 2);
  CHECK(entry_width(5, false) == 3);
  CHECK(entry_width(0, true) == 0);
  CHECK(entry_width(1, true) == 1);
}

TEST_CASE("init_root") {
  const auto cl = ClassList::init_root(8);
  CHECK(cl.n() == 8);
  CHECK(cl.storage_bits() == 0);
  for (SampleIndex i = 0; i < 8; ++i) CHECK(cl.leaf_of(i) == NodeId{0});
  CHECK(ClassList::init_root(0).n() == 0);
  CHECK(error_of([&] { (void)cl.leaf_of(8); }) == Errc::kIndexOutOfRange);
}

TEST_CASE("root split moves bagged samples by their bits") {
  auto cl = ClassList::init_root(6);
  const std::vector<std::uint8_t> bags{1, 0, 1, 0, 0, 1};
  cl.apply_depth_update(DepthUpdate{{{0, 1, 2}}, {}}, bags, bits({1, 0, 1}));
  CHECK(cl.leaf_of(0) == NodeId{1});
  CHECK(cl.leaf_of(2) == NodeId{2});
  CHECK(cl.leaf_of(5) == NodeId{1});
  CHECK_FALSE(cl.leaf_of(1).has_value());
  CHECK(cl.has_closed());
  CHECK(cl.active_leaves() == 2);
  CHECK(cl.width() == 2);
  CHECK(cl.leaf_ids() == std::vector<NodeId>{1, 2});
}

TEST_CASE("closing a leaf sends its samples to the closed code") {
  auto cl = ClassList::init_root(4);
  const std::vector<std::uint8_t> bags{1, 1, 1, 1};
  cl.apply_depth_update(DepthUpdate{{{0, 1, 2}}, {}}, bags, bits({1, 1, 0, 0}));
  REQUIRE(cl.active_leaves() == 2);
  cl.apply_depth_update(DepthUpdate{{}, {1}}, bags, ConditionBitmap());
  CHECK(cl.active_leaves() == 1);
  CHECK_FALSE(cl.leaf_of(0).has_value());
  CHECK_FALSE(cl.leaf_of(1).has_value());
  CHECK(cl.leaf_of(2) == NodeId{2});
  CHECK(cl.width() == 1);
}

TEST_CASE("bitmap length is checked") {
  auto cl = ClassList::init_root(3);
  const std::vector<std::uint8_t> bags{1, 1, 1};
  CHECK(error_of([&] { cl.apply_depth_update(DepthUpdate{{{0, 1, 2}}, {}}, bags, bits({1})); }) ==
        Errc::kBitmapLengthMismatch);
  auto other = ClassList::init_root(3);
  CHECK(error_of([&] {
          other.apply_depth_update(DepthUpdate{{{0, 1, 2}}, {}}, bags, bits({1, 0, 1, 1}));
        }) == Errc::kBitmapLengthMismatch);
}

TEST_CASE("class list replay matches routing through finished trees") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto ds = presort(random_dataset(seed, CorpusShape{100, 800, 10}), 1u << 20);
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.min_records = seed % 2 ? 1 : 4;
    const auto ctx = SeedContext::make(seed);
    for (TreeIndex p = 0; p < 2; ++p) {
      const DecisionTree tree = train_reference_tree(ds, cfg, ctx, p);
      replay(ds, tree, ctx, 0);
      replay(ds, tree, ctx, 37);
    }
  }
}

TEST_CASE("chunked storage rounds each page to words") {
  auto cl = ClassList::init_root(100, 0, 30);
  std::vector<std::uint8_t> bags(100, 1);
  ConditionBitmap b;
  for (int i = 0; i < 100; ++i) b.push_back(i % 3 == 0);
  cl.apply_depth_update(DepthUpdate{{{0, 1, 2}}, {}}, bags, b);
  CHECK(cl.width() == 1);
  // Four pages of 30, 30, 30 and 10 one-bit entries.
  CHECK(cl.storage_bits() == 4 * 64);
  for (SampleIndex i = 0; i < 100; ++i) CHECK(cl.leaf_of(i) == NodeId{i % 3 == 0 ? 1u : 2u});
  std::ostringstream out;
  cl.dump(out);
  CHECK_FALSE(out.str().empty());
}
