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

#ifndef DRF_TREE_H_
#define DRF_TREE_H_

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "drf/dataset.h"
#include "drf/split.h"

namespace drf {

enum class LeafReason : std::uint8_t {
  kInternal = 0,  // Not a leaf.
  kPure = 1,
  kTooSmall = 2,
  kNoGain = 3,
  kMaxDepth = 4,
};

std::string_view leaf_reason_name(LeafReason r);

inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

struct TreeNode {
  NodeId id = 0;
  std::uint32_t depth = 0;
  NodeId parent = kNoNode;
  // Bag-weighted class counts of the bagged samples reaching the node.
  LabelHistogram distribution;
  LeafReason reason = LeafReason::kInternal;
  // Internal nodes only.
  FeatureIndex feature = 0;
  Condition condition = NumericalCondition{0.0};
  double score = 0.0;
  NodeId positive = kNoNode;  // Condition true.
  NodeId negative = kNoNode;

  bool is_leaf() const { return reason != LeafReason::kInternal; }
  bool operator==(const TreeNode&) const = default;
};

// Per-depth training statistics, recorded for every depth that was searched.
struct DepthStats {
  std::uint32_t depth = 0;
  // z_i: open leaves searched at this depth.
  std::uint32_t open_leaves = 0;
  // alpha_i: bag-weighted fraction of records in open leaves.
  double open_fraction = 0.0;
  // Record-weighted mean depth of the leaves closed at depth <= i.
  double mean_closed_depth = 0.0;
  // Z_i: most drawn features assigned to one worker.
  std::uint32_t max_worker_features = 0;
  // Distinct candidate features drawn over all open leaves (m'').
  std::uint32_t drawn_features = 0;
  std::uint64_t bagged_open_samples = 0;
  bool pruning = false;
  double seconds = 0.0;
};

struct DecisionTree {
  TreeIndex index = 0;
  std::vector<TreeNode> nodes;  // nodes[k].id == k, breadth-first.
  std::vector<DepthStats> depth_stats;

  // Maximum leaf depth.
  std::uint32_t depth() const;
  std::size_t leaves() const;
  const TreeNode& root() const { return nodes.front(); }

  // Leaf reached by a row.
  const TreeNode& route(const FeatureTable& rows, SampleIndex i) const;
  // Leaf class distribution normalized; `positive_class` probability.
  double probability(const FeatureTable& rows, SampleIndex i, ClassId positive_class) const;
};

struct Forest {
  std::uint32_t num_classes = 0;
  std::vector<ColumnKind> kinds;
  std::vector<DecisionTree> trees;
};

inline constexpr std::uint32_t kTreeFormatVersion = 1;

// Wall-clock depth timings are only written when `timings` is set, so saved
// forests are byte-identical across runs.
void encode_tree(const DecisionTree& tree, ByteWriter& w, bool timings = false);
DecisionTree decode_tree(ByteReader& r);
std::vector<std::uint8_t> serialize_forest(const Forest& forest);
Forest deserialize_forest(std::span<const std::uint8_t> bytes);
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

// One node per line: id, depth, then the condition or the leaf distribution.
// Thresholds and scores are printed as hex floats so the dump is exact.
void dump_tree(const DecisionTree& tree, std::ostream& out);
std::string dump_tree(const DecisionTree& tree);

}  // namespace drf

#endif  // DRF_TREE_H_
