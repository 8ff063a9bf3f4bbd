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

#include <cmath>
#include <random>

#include "drf/evaluation.h"
#include "drf/synth.h"
#include "test_util.h"

using namespace drf;
using drf::testing::error_of;
using drf::testing::numeric_dataset;
using drf::testing::sorted;
using drf::testing::train_inproc;

namespace {

// Pair enumeration: positives outranking negatives, ties worth one half.
double pair_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (!y[a]) continue;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (y[b]) continue;
      pairs += 1;
      wins += s[a] > s[b] ? 1.0 : s[a] == s[b] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

DecisionTree full_tree(std::uint32_t depth) {
  DecisionTree t;
  std::uint32_t next = 1;
  t.nodes.push_back(TreeNode{});
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    if (t.nodes[k].depth == depth) {
      t.nodes[k].reason = LeafReason::kPure;
      t.nodes[k].distribution = LabelHistogram{1, 0};
      continue;
    }
    t.nodes[k].positive = next++;
    t.nodes[k].negative = next++;
    for (int c = 0; c < 2; ++c) {
      TreeNode child;
      child.id = static_cast<NodeId>(t.nodes.size());
      child.depth = t.nodes[k].depth + 1;
      child.parent = t.nodes[k].id;
      t.nodes.push_back(child);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("auc examples") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<std::uint8_t> y{0, 0, 1, 1};
  CHECK(auc(s, y) == 0.75);
  CHECK(auc(std::vector<double>{0.1, 0.2, 0.9}, std::vector<std::uint8_t>{0, 0, 1}) == 1.0);
  CHECK(auc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<std::uint8_t>{0, 1, 1}) == 0.5);
  CHECK(error_of([] { auc(std::vector<double>{0.5}, std::vector<std::uint8_t>{1}); }) ==
        Errc::kDegenerateLabels);
}

TEST_CASE("auc agrees with pair enumeration") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 20) / 20.0;
      y[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(auc(s, y) == doctest::Approx(pair_auc(s, y)).epsilon(1e-12));
  }
}

TEST_CASE("random scores give an auc of one half") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(100000);
  std::vector<std::uint8_t> y(100000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    y[i] = i % 2;
  }
  CHECK(std::abs(auc(s, y) - 0.5) < 0.01);
}

TEST_CASE("one-tree out-of-bag set is the zero-bag samples") {
  auto ds = sorted(random_dataset(4, CorpusShape{2000, 2000, 6}));
  TrainConfig cfg;
  cfg.num_trees = 1;
  const auto result = train_inproc(ds, cfg, 2);
  const auto scores = oob_scores(result.forest, FeatureTable(*ds), result.seed);
  std::size_t scored = 0;
  for (SampleIndex i = 0; i < ds->n(); ++i) {
    CHECK((scores.trees[i] == 1) == (bag(i, 0, result.seed) == 0));
    scored += scores.trees[i];
  }
  const double n = static_cast<double>(ds->n());
  const double p = std::exp(-1.0);
  CHECK(std::abs(scored - p * n) < 3 * std::sqrt(n * p * (1 - p)));
}

TEST_CASE("sharded out-of-bag scores equal a single-pass recomputation") {
  auto ds = sorted(random_dataset(6, CorpusShape{800, 800, 8}));
  TrainConfig cfg;
  cfg.num_trees = 5;
  const auto result = train_inproc(ds, cfg, 3);
  const FeatureTable rows(*ds);
  const auto sharded = oob_scores(result.forest, rows, result.seed, 1, 4);
  for (SampleIndex i = 0; i < ds->n(); ++i) {
    double sum = 0;
    std::uint32_t count = 0;
    for (const auto& tree : result.forest.trees) {
      if (bag(i, tree.index, result.seed) != 0) continue;
      sum += tree.probability(rows, i, 1);
      ++count;
    }
    CHECK(sharded.trees[i] == count);
    if (count) CHECK(sharded.score[i] == sum / count);
  }
  const auto one = oob_evaluate(result.forest, *ds, result.seed, 1);
  const auto four = oob_evaluate(result.forest, *ds, result.seed, 4);
  CHECK(one.auc == four.auc);
  CHECK(one.accuracy == four.accuracy);
  CHECK(one.per_tree_auc.size() == 5);
}

TEST_CASE("a constant predictor scores one half") {
  Forest forest;
  forest.num_classes = 2;
  forest.kinds = {ColumnKind::kNumerical};
  DecisionTree t;
  TreeNode leaf;
  leaf.reason = LeafReason::kNoGain;
  leaf.distribution = LabelHistogram{1, 1};
  t.nodes.push_back(leaf);
  forest.trees.push_back(t);
  const auto ds = numeric_dataset({{1, 2, 3, 4}}, {0, 1, 0, 1});
  CHECK(holdout_evaluate(forest, ds).auc == 0.5);
}

TEST_CASE("feature importance") {
  // Label copies feature 0; nine noise features.
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> cols(10, std::vector<double>(1500));
  std::vector<ClassId> labels(1500);
  for (std::size_t i = 0; i < 1500; ++i) {
    labels[i] = static_cast<ClassId>(rng() % 2);
    cols[0][i] = labels[i];
    for (int j = 1; j < 10; ++j) cols[j][i] = static_cast<double>(rng() % 1000);
  }
  auto ds = sorted(numeric_dataset(cols, labels));
  TrainConfig cfg;
  cfg.num_trees = 10;
  const auto result = train_inproc(ds, cfg, 2);
  const auto gain = feature_importance(result.forest, *ds, result.seed, ImportanceMethod::kSplitGain);
  const auto perm = feature_importance(result.forest, *ds, result.seed, ImportanceMethod::kOobPermutation, 5);
  CHECK(std::max_element(gain.begin(), gain.end()) - gain.begin() == 0);
  CHECK(std::max_element(perm.begin(), perm.end()) - perm.begin() == 0);

  SUBCASE("unused features have zero split gain") {
    std::vector<char> used(10, 0);
    for (const auto& tree : result.forest.trees) {
      for (const auto& node : tree.nodes) {
        if (!node.is_leaf()) used[node.feature] = 1;
      }
    }
    for (int j = 0; j < 10; ++j) {
      if (!used[j]) CHECK(gain[j] == 0.0);
    }
  }
}

TEST_CASE("permuting a useless variable costs nothing") {
  SyntheticSpec spec;
  spec.family = Family::kMajority;
  spec.n = 5000;
  spec.informative = 3;
  spec.useless = 2;
  const auto data = generate(spec);
  auto ds = sorted(data.train);
  TrainConfig cfg;
  cfg.num_trees = 10;
  const auto result = train_inproc(ds, cfg, 2);
  const auto perm = feature_importance(result.forest, *ds, result.seed, ImportanceMethod::kOobPermutation);
  CHECK(std::abs(perm[3]) < 0.02);
  CHECK(std::abs(perm[4]) < 0.02);
  CHECK(perm[0] > 0.02);
}

TEST_CASE("node density") {
  CHECK(std::abs(node_density(140000, 20) - 0.134) < 0.001);
  CHECK(std::abs(node_density(320000, 20) - 0.305) < 0.001);
  CHECK(std::abs(node_density(435000, 20) - 0.415) < 0.001);
  const auto stats = tree_stats(full_tree(3));
  REQUIRE(stats.node_density.size() == 4);
  for (double d : stats.node_density) CHECK(d == 1.0);
}

TEST_CASE("rote learning baseline") {
  SyntheticSpec spec;
  spec.family = Family::kXor;
  spec.n = 2000;
  spec.informative = 2;
  spec.useless = 2;
  const auto data = generate(spec);
  CHECK(rote_baseline(data.train, data.train) == 1.0);

  SUBCASE("half of the test rows were seen") {
    // First 200 test rows come from the training set, 200 are new.
    std::vector<std::vector<double>> cols(4);
    std::vector<ClassId> labels;
    for (SampleIndex i = 0; i < 400; ++i) {
      const PreparedDataset& src = i < 200 ? data.train : data.test;
      for (FeatureIndex j = 0; j < 4; ++j) cols[j].push_back(numerical_values(src, j)[i]);
      labels.push_back(src.labels[i]);
    }
    const auto test = numeric_dataset(cols, labels);
    const double got = rote_baseline(data.train, test, 9);
    // Seen rows score their label; new rows draw from the documented stream.
    SplitMixRng rng(splitmix64(9 ^ 0x7F4A7C159E3779B9ull));
    std::vector<double> s;
    std::vector<std::uint8_t> y;
    for (SampleIndex i = 0; i < 400; ++i) {
      s.push_back(i < 200 ? static_cast<double>(labels[i]) : rng.uniform());
      y.push_back(labels[i] == 1);
    }
    CHECK(got == doctest::Approx(pair_auc(s, y)).epsilon(1e-12));
    CHECK(got > 0.5);
    CHECK(got < 1.0);
  }
}

TEST_CASE("report writers") {
  EvalReport r;
  r.auc = 0.75;
  r.per_tree_auc = {0.5, std::nan("")};
  r.node_density = {1.0};
  r.sample_density = {1.0};
  std::ostringstream csv;
  write_report_csv(r, csv);
  CHECK(csv.str().rfind("metric,index,value\nauc,,0.75\n", 0) == 0);
  const std::string json = report_json(r);
  CHECK(json.find("null") != std::string::npos);
}
