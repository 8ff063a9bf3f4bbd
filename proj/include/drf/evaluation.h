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

#ifndef DRF_EVALUATION_H_
#define DRF_EVALUATION_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "drf/dataset.h"
#include "drf/seeding.h"
#include "drf/tree.h"

namespace drf {

// Probability that a random positive outranks a random negative, ties
// counting one half. Labels are 0/1. Throws DegenerateLabels without both.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct EvalReport {
  double auc = 0.0;
  double accuracy = 0.0;
  // Samples that received a score.
  std::size_t scored = 0;
  std::vector<double> per_tree_auc;  // NaN when a tree's set is degenerate.
  // Means over trees, indexed by depth.
  std::vector<double> node_density;
  std::vector<double> sample_density;
};

struct OobScores {
  // Mean positive-class probability over the out-of-bag trees of each sample.
  std::vector<double> score;
  // Argmax of the mean class distribution.
  std::vector<ClassId> predicted;
  std::vector<std::uint32_t> trees;  // OOB trees per sample; 0 = unscored.
};

// Row-sharded scoring: shard k of `shards` computes rows [t_k, t_{k+1}) on
// its own thread; per-sample sums run in ascending tree order.
OobScores oob_scores(const Forest& forest, const FeatureTable& rows, const SeedContext& ctx,
                     ClassId positive_class = 1, std::size_t shards = 1);

// Out-of-bag report on the training data; the positive class is class 1.
EvalReport oob_evaluate(const Forest& forest, const PreparedDataset& ds, const SeedContext& ctx,
                        std::size_t evaluators = 1);

// Every tree scores every row of a held-out set.
EvalReport holdout_evaluate(const Forest& forest, const PreparedDataset& test);

enum class ImportanceMethod { kSplitGain, kOobPermutation };

std::vector<double> feature_importance(const Forest& forest, const PreparedDataset& ds,
                                       const SeedContext& ctx, ImportanceMethod method,
                                       std::uint64_t seed = 1);

// leaves / 2^depth.
double node_density(std::uint64_t leaves, std::uint32_t depth);

struct TreeDensity {
  // Nodes present at depth i over 2^i.
  std::vector<double> node_density;
  // Bag-weighted fraction of records in open leaves at depth i.
  std::vector<double> sample_density;
};

TreeDensity tree_stats(const DecisionTree& tree);

// Rows seen in training get their memorized label, other rows a uniform
// random score; returns the AUC on the test rows.
double rote_baseline(const PreparedDataset& train, const PreparedDataset& test,
                     std::uint64_t seed = 1);

void write_report_csv(const EvalReport& report, std::ostream& out);
std::string report_json(const EvalReport& report);

}  // namespace drf

#endif  // DRF_EVALUATION_H_
