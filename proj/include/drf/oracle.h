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

#ifndef DRF_ORACLE_H_
#define DRF_ORACLE_H_

#include <string>

#include "drf/config.h"
#include "drf/dataset.h"
#include "drf/seeding.h"
#include "drf/tree.h"

namespace drf {

// Sequential in-memory Random Forest: recursive node-at-a-time CART with
// per-node sorting, using the shared bagging, feature sampling and score
// definitions. Throws OutOfMemoryGuard beyond cfg.oracle_cell_cap cells.
Forest train_reference_forest(const PreparedDataset& ds, const TrainConfig& cfg,
                              const SeedContext& ctx);
DecisionTree train_reference_tree(const PreparedDataset& ds, const TrainConfig& cfg,
                                  const SeedContext& ctx, TreeIndex p);

struct ForestComparison {
  bool equal = true;
  // First divergence, naming the tree and node.
  std::string divergence;
  explicit operator bool() const { return equal; }
};

// Structural comparison: topology, features, exact thresholds, subsets and
// leaf distributions. Depth statistics are ignored.
ForestComparison forests_equal(const Forest& a, const Forest& b);
ForestComparison trees_equal(const DecisionTree& a, const DecisionTree& b);

}  // namespace drf

#endif  // DRF_ORACLE_H_
