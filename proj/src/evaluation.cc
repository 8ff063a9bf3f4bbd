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

#include "drf/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace drf {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::kInvalidArgument, "auc: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the concordant pair count, so ties stay integral.
  unsigned __int128 twice = 0;
  std::uint64_t neg_below = 0, positives = 0, negatives = 0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    std::uint64_t pos = 0, neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[k]]) {
      (labels[order[end]] ? pos : neg) += 1;
      ++end;
    }
    twice += static_cast<unsigned __int128>(2) * pos * neg_below +
             static_cast<unsigned __int128>(pos) * neg;
    neg_below += neg;
    positives += pos;
    negatives += neg;
    k = end;
  }
  if (positives == 0 || negatives == 0) {
    throw Error(Errc::kDegenerateLabels, "auc needs at least one positive and one negative");
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

namespace {

template <typename ValueOf>
const TreeNode& route_with(const DecisionTree& tree, ValueOf&& value_of) {
  const TreeNode* node = &tree.nodes.front();
  while (!node->is_leaf()) {
    bool holds;
    if (const auto* c = std::get_if<NumericalCondition>(&node->condition)) {
      holds = numerical_holds(*c, value_of.numerical(node->feature));
    } else {
      holds = categorical_holds(std::get<CategoricalCondition>(node->condition),
                                value_of.categorical(node->feature));
    }
    node = &tree.nodes[holds ? node->positive : node->negative];
  }
  return *node;
}

// Row i, with feature `swapped` read from row `source` instead.
struct RowView {
  const FeatureTable& rows;
  SampleIndex i;
  FeatureIndex swapped;
  SampleIndex source;
  double numerical(FeatureIndex j) const { return rows.numerical(j == swapped ? source : i, j); }
  std::uint32_t categorical(FeatureIndex j) const {
    return rows.categorical(j == swapped ? source : i, j);
  }
};

std::vector<std::uint8_t> binary_labels(const std::vector<ClassId>& labels, ClassId positive) {
  std::vector<std::uint8_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == positive;
  return out;
}

std::vector<std::vector<std::uint8_t>> bag_table(const Forest& forest, std::size_t n,
                                                 const SeedContext& ctx) {
  std::vector<std::vector<std::uint8_t>> bags;
  for (const auto& tree : forest.trees) bags.push_back(bag_column(n, tree.index, ctx));
  return bags;
}

double auc_or_nan(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  try {
    return auc(scores, labels);
  } catch (const Error& e) {
    if (e.code() != Errc::kDegenerateLabels) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void add_tree_curves(const Forest& forest, EvalReport& report) {
  std::size_t depths = 0;
  std::vector<TreeDensity> stats;
  for (const auto& tree : forest.trees) {
    stats.push_back(tree_stats(tree));
    depths = std::max(depths, stats.back().node_density.size());
  }
  report.node_density.assign(depths, 0.0);
  report.sample_density.assign(depths, 0.0);
  const double trees = static_cast<double>(forest.trees.size());
  for (std::size_t p = 0; p < stats.size(); ++p) {
    for (std::size_t i = 0; i < stats[p].node_density.size(); ++i) {
      report.node_density[i] += stats[p].node_density[i] / trees;
      report.sample_density[i] += stats[p].sample_density[i] / trees;
    }
  }
}

}  // namespace

OobScores oob_scores(const Forest& forest, const FeatureTable& rows, const SeedContext& ctx,
                     ClassId positive_class, std::size_t shards) {
  const std::size_t n = rows.n();
  const std::uint32_t classes = forest.num_classes;
  OobScores out;
  out.score.assign(n, 0.0);
  out.predicted.assign(n, 0);
  out.trees.assign(n, 0);
  const auto bounds = shard_bounds(n, std::max<std::size_t>(shards, 1));
  auto run = [&](std::size_t k) {
    std::vector<double> sum(classes);
    for (SampleIndex i = bounds[k]; i < bounds[k + 1]; ++i) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::uint32_t count = 0;
      for (const auto& tree : forest.trees) {
        if (bag(i, tree.index, ctx) != 0) continue;
        const LabelHistogram& h = tree.route(rows, i).distribution;
        for (std::uint32_t c = 0; c < classes; ++c) {
          sum[c] += static_cast<double>(h.counts[c]) / static_cast<double>(h.total);
        }
        ++count;
      }
      out.trees[i] = count;
      if (count == 0) continue;
      out.score[i] = sum[positive_class] / count;
      out.predicted[i] = static_cast<ClassId>(std::max_element(sum.begin(), sum.end()) - sum.begin());
    }
  };
  if (bounds.size() > 2) {
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) threads.emplace_back(run, k);
    for (auto& t : threads) t.join();
  } else {
    run(0);
  }
  return out;
}

EvalReport oob_evaluate(const Forest& forest, const PreparedDataset& ds, const SeedContext& ctx,
                        std::size_t evaluators) {
  if (forest.trees.empty()) throw Error(Errc::kInvalidArgument, "empty forest");
  const FeatureTable rows(ds);
  const ClassId positive = 1;
  const OobScores oob = oob_scores(forest, rows, ctx, positive, evaluators);
  EvalReport report;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::size_t correct = 0;
  for (SampleIndex i = 0; i < ds.n(); ++i) {
    if (oob.trees[i] == 0) continue;
    scores.push_back(oob.score[i]);
    labels.push_back(ds.labels[i] == positive);
    correct += oob.predicted[i] == ds.labels[i];
  }
  if (scores.empty()) throw Error(Errc::kNoOobSamples, "every sample is in-bag for every tree");
  report.scored = scores.size();
  report.auc = auc(scores, labels);
  report.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  for (const auto& tree : forest.trees) {
    std::vector<double> s;
    std::vector<std::uint8_t> y;
    for (SampleIndex i = 0; i < ds.n(); ++i) {
      if (bag(i, tree.index, ctx) != 0) continue;
      s.push_back(tree.probability(rows, i, positive));
      y.push_back(ds.labels[i] == positive);
    }
    report.per_tree_auc.push_back(auc_or_nan(s, y));
  }
  add_tree_curves(forest, report);
  return report;
}

EvalReport holdout_evaluate(const Forest& forest, const PreparedDataset& test) {
  if (forest.trees.empty()) throw Error(Errc::kInvalidArgument, "empty forest");
  const FeatureTable rows(test);
  const ClassId positive = 1;
  const std::uint32_t classes = forest.num_classes;
  EvalReport report;
  std::vector<double> scores(test.n(), 0.0);
  std::vector<std::vector<double>> per_tree(forest.trees.size(), std::vector<double>(test.n()));
  std::size_t correct = 0;
  std::vector<double> sum(classes);
  for (SampleIndex i = 0; i < test.n(); ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t p = 0; p < forest.trees.size(); ++p) {
      const LabelHistogram& h = forest.trees[p].route(rows, i).distribution;
      for (std::uint32_t c = 0; c < classes; ++c) {
        sum[c] += static_cast<double>(h.counts[c]) / static_cast<double>(h.total);
      }
      per_tree[p][i] = static_cast<double>(h.counts[positive]) / static_cast<double>(h.total);
    }
    scores[i] = sum[positive] / static_cast<double>(forest.trees.size());
    correct += static_cast<ClassId>(std::max_element(sum.begin(), sum.end()) - sum.begin()) == test.labels[i];
  }
  const auto labels = binary_labels(test.labels, positive);
  report.scored = test.n();
  report.auc = auc(scores, labels);
  report.accuracy = test.n() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.n());
  for (const auto& s : per_tree) report.per_tree_auc.push_back(auc_or_nan(s, labels));
  add_tree_curves(forest, report);
  return report;
}

std::vector<double> feature_importance(const Forest& forest, const PreparedDataset& ds,
                                       const SeedContext& ctx, ImportanceMethod method,
                                       std::uint64_t seed) {
  if (forest.trees.empty()) throw Error(Errc::kInvalidArgument, "empty forest");
  const std::size_t m = ds.m();
  std::vector<double> importance(m, 0.0);
  if (method == ImportanceMethod::kSplitGain) {
    for (const auto& tree : forest.trees) {
      for (const auto& node : tree.nodes) {
        if (!node.is_leaf()) {
          importance[node.feature] += node.score * static_cast<double>(node.distribution.total);
        }
      }
    }
    return importance;
  }

  const FeatureTable rows(ds);
  const std::size_t n = ds.n();
  const ClassId positive = 1;
  const auto bags = bag_table(forest, n, ctx);
  const auto labels = binary_labels(ds.labels, positive);

  auto oob_auc = [&](FeatureIndex swapped, const std::vector<std::vector<SampleIndex>>* sources) {
    std::vector<double> sum(n, 0.0);
    std::vector<std::uint32_t> count(n, 0);
    for (std::size_t p = 0; p < forest.trees.size(); ++p) {
      const DecisionTree& tree = forest.trees[p];
      for (SampleIndex i = 0; i < n; ++i) {
        if (bags[p][i] != 0) continue;
        const SampleIndex source = sources ? (*sources)[p][i] : i;
        const LabelHistogram& h = route_with(tree, RowView{rows, i, swapped, source}).distribution;
        sum[i] += static_cast<double>(h.counts[positive]) / static_cast<double>(h.total);
        ++count[i];
      }
    }
    std::vector<double> s;
    std::vector<std::uint8_t> y;
    for (SampleIndex i = 0; i < n; ++i) {
      if (count[i] == 0) continue;
      s.push_back(sum[i] / count[i]);
      y.push_back(labels[i]);
    }
    if (s.empty()) throw Error(Errc::kNoOobSamples, "every sample is in-bag for every tree");
    return auc(s, y);
  };

  const double baseline = oob_auc(static_cast<FeatureIndex>(m), nullptr);
  std::vector<std::vector<SampleIndex>> sources(forest.trees.size(), std::vector<SampleIndex>(n));
  for (FeatureIndex j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < forest.trees.size(); ++p) {
      std::vector<SampleIndex> oob;
      for (SampleIndex i = 0; i < n; ++i) {
        if (bags[p][i] == 0) oob.push_back(i);
      }
      std::vector<SampleIndex> permuted = oob;
      SplitMixRng rng(splitmix64(seed ^ splitmix64((std::uint64_t{j} << 32) | forest.trees[p].index)));
      rng.shuffle(permuted);
      std::iota(sources[p].begin(), sources[p].end(), 0);
      for (std::size_t k = 0; k < oob.size(); ++k) sources[p][oob[k]] = permuted[k];
    }
    importance[j] = baseline - oob_auc(j, &sources);
  }
  return importance;
}

double node_density(std::uint64_t leaves, std::uint32_t depth) {
  return static_cast<double>(leaves) / std::ldexp(1.0, static_cast<int>(depth));
}

TreeDensity tree_stats(const DecisionTree& tree) {
  TreeDensity out;
  std::uint32_t max_depth = 0;
  for (const auto& node : tree.nodes) max_depth = std::max(max_depth, node.depth);
  std::vector<std::uint64_t> nodes(max_depth + 1, 0);
  for (const auto& node : tree.nodes) ++nodes[node.depth];
  for (std::uint32_t i = 0; i <= max_depth; ++i) out.node_density.push_back(node_density(nodes[i], i));
  out.sample_density.assign(max_depth + 1, 0.0);
  for (const auto& s : tree.depth_stats) {
    if (s.depth <= max_depth) out.sample_density[s.depth] = s.open_fraction;
  }
  return out;
}

namespace {

std::string row_key(const FeatureTable& rows, SampleIndex i) {
  std::string key;
  key.reserve(rows.m() * 8);
  for (FeatureIndex j = 0; j < rows.m(); ++j) {
    char buf[8];
    if (rows.kind(j) == ColumnKind::kNumerical) {
      const double v = rows.numerical(i, j);
      std::memcpy(buf, &v, 8);
      key.append(buf, 8);
    } else {
      const std::uint32_t v = rows.categorical(i, j);
      std::memcpy(buf, &v, 4);
      key.append(buf, 4);
    }
  }
  return key;
}

}  // namespace

double rote_baseline(const PreparedDataset& train, const PreparedDataset& test, std::uint64_t seed) {
  const ClassId positive = 1;
  const FeatureTable train_rows(train);
  const FeatureTable test_rows(test);
  // Memorized rows: positive count and occurrences.
  std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>> memory;
  for (SampleIndex i = 0; i < train.n(); ++i) {
    auto& slot = memory[row_key(train_rows, i)];
    slot.first += train.labels[i] == positive;
    ++slot.second;
  }
  SplitMixRng rng(splitmix64(seed ^ 0x7F4A7C159E3779B9ull));
  std::vector<double> scores(test.n());
  for (SampleIndex i = 0; i < test.n(); ++i) {
    auto it = memory.find(row_key(test_rows, i));
    scores[i] = it == memory.end()
                    ? rng.uniform()
                    : static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
  }
  return auc(scores, binary_labels(test.labels, positive));
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "metric,index,value\n";
  out << "auc,," << report.auc << "\n";
  out << "accuracy,," << report.accuracy << "\n";
  out << "scored,," << report.scored << "\n";
  for (std::size_t p = 0; p < report.per_tree_auc.size(); ++p) {
    out << "tree_auc," << p << "," << report.per_tree_auc[p] << "\n";
  }
  for (std::size_t i = 0; i < report.node_density.size(); ++i) {
    out << "node_density," << i << "," << report.node_density[i] << "\n";
    out << "sample_density," << i << "," << report.sample_density[i] << "\n";
  }
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["auc"] = report.auc;
  j["accuracy"] = report.accuracy;
  j["scored"] = report.scored;
  auto numbers = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
    return a;
  };
  j["per_tree_auc"] = numbers(report.per_tree_auc);
  j["node_density"] = numbers(report.node_density);
  j["sample_density"] = numbers(report.sample_density);
  return j.dump(2);
}

}  // namespace drf
