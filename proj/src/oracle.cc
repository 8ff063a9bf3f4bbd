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

#include "drf/oracle.h"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <memory>
#include <numeric>

namespace drf {

namespace {

struct Sample {
  SampleIndex index;
  std::uint64_t weight;
  ClassId label;
};

struct RawNode {
  std::uint32_t depth = 0;
  LabelHistogram distribution;
  LeafReason reason = LeafReason::kInternal;
  FeatureIndex feature = 0;
  Condition condition = NumericalCondition{0.0};
  double score = 0.0;
  std::unique_ptr<RawNode> positive;
  std::unique_ptr<RawNode> negative;
};

struct Best {
  bool found = false;
  FeatureIndex feature = 0;
  Condition condition = NumericalCondition{0.0};
  double score = 0.0;
};

class ReferenceTrainer {
 public:
  ReferenceTrainer(const PreparedDataset& ds, const TrainConfig& cfg, const SeedContext& ctx,
                   TreeIndex p)
      : ds_(ds), cfg_(cfg), ctx_(ctx), p_(p), classes_(ds.num_classes()) {
    for (FeatureIndex j = 0; j < ds.m(); ++j) {
      if (ds.specs[j].kind == ColumnKind::kNumerical) {
        numeric_.push_back(numerical_values(ds, j));
        category_.emplace_back();
      } else {
        numeric_.emplace_back();
        category_.push_back(categorical_values(ds, j));
      }
    }
  }

  DecisionTree train() {
    std::vector<Sample> samples;
    for (SampleIndex i = 0; i < ds_.n(); ++i) {
      const std::uint32_t b = bag(i, p_, ctx_);
      if (b > 0) samples.push_back({i, b, ds_.labels[i]});
    }
    auto root = grow(samples, 0, kRootKey);
    return flatten(*root);
  }

 private:
  LabelHistogram histogram(const std::vector<Sample>& samples) const {
    LabelHistogram h(classes_);
    for (const auto& s : samples) h.add(s.label, s.weight);
    return h;
  }

  std::unique_ptr<RawNode> grow(const std::vector<Sample>& samples, std::uint32_t depth,
                                std::uint64_t key) {
    auto node = std::make_unique<RawNode>();
    node->depth = depth;
    node->distribution = histogram(samples);
    const LabelHistogram& h = node->distribution;
    if (h.pure()) {
      node->reason = LeafReason::kPure;
      return node;
    }
    if (h.total < cfg_.min_records) {
      node->reason = LeafReason::kTooSmall;
      return node;
    }
    if (cfg_.max_depth >= 0 && depth >= static_cast<std::uint32_t>(cfg_.max_depth)) {
      node->reason = LeafReason::kMaxDepth;
      return node;
    }
    Best best;
    const auto features = candidate_features(key, depth, p_, cfg_.plan(),
                                             static_cast<std::uint32_t>(ds_.m()), ctx_);
    for (FeatureIndex j : features) {
      if (ds_.specs[j].kind == ColumnKind::kNumerical) {
        best_numerical(j, samples, h, best);
      } else {
        best_categorical(j, samples, h, best);
      }
    }
    if (!best.found) {
      node->reason = LeafReason::kNoGain;
      return node;
    }
    node->feature = best.feature;
    node->condition = best.condition;
    node->score = best.score;
    std::vector<Sample> pos, neg;
    for (const auto& s : samples) {
      (goes_positive(best, s.index) ? pos : neg).push_back(s);
    }
    node->positive = grow(pos, depth + 1, child_key(key, true));
    node->negative = grow(neg, depth + 1, child_key(key, false));
    return node;
  }

  bool goes_positive(const Best& best, SampleIndex i) const {
    if (const auto* c = std::get_if<NumericalCondition>(&best.condition)) {
      return numeric_[best.feature][i] <= c->threshold;
    }
    const auto& subset = std::get<CategoricalCondition>(best.condition).subset;
    return std::find(subset.begin(), subset.end(), category_[best.feature][i]) != subset.end();
  }

  // Features are visited in ascending order and thresholds in ascending
  // order, so a strict improvement test realizes the tie rules.
  void offer(Best& best, FeatureIndex j, Condition condition, double score) const {
    if (score > 0.0 && (!best.found || score > best.score)) {
      best.found = true;
      best.feature = j;
      best.condition = std::move(condition);
      best.score = score;
    }
  }

  void best_numerical(FeatureIndex j, const std::vector<Sample>& samples, const LabelHistogram& h,
                      Best& best) const {
    const auto& values = numeric_[j];
    std::vector<Sample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(), [&](const Sample& a, const Sample& b) {
      const double va = values[a.index], vb = values[b.index];
      return va < vb || (va == vb && a.index < b.index);
    });
    LabelHistogram left(classes_);
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (k > 0) {
        const double prev = values[sorted[k - 1].index];
        const double cur = values[sorted[k].index];
        if (cur > prev && left.total >= cfg_.min_records &&
            h.total - left.total >= cfg_.min_records) {
          offer(best, j, NumericalCondition{split_threshold(prev, cur)},
                split_score(h, left, cfg_.criterion));
        }
      }
      left.add(sorted[k].label, sorted[k].weight);
    }
  }

  void best_categorical(FeatureIndex j, const std::vector<Sample>& samples,
                        const LabelHistogram& h, Best& best) const {
    const std::uint32_t arity = *ds_.specs[j].arity();
    std::vector<LabelHistogram> per_value(arity, LabelHistogram(classes_));
    for (const auto& s : samples) {
      const std::uint32_t v = category_[j][s.index];
      if (v < arity) per_value[v].add(s.label, s.weight);
    }
    std::vector<std::uint32_t> order;
    for (std::uint32_t v = 0; v < arity; ++v) {
      if (per_value[v].total > 0) order.push_back(v);
    }
    if (order.size() < 2) return;
    // Rank values by the rate of class 1 (two classes) or of the node's
    // majority class, compared as exact fractions.
    const ClassId ranked = classes_ == 2 ? 1 : h.argmax();
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
      return static_cast<unsigned __int128>(per_value[x].counts[ranked]) * per_value[y].total <
             static_cast<unsigned __int128>(per_value[y].counts[ranked]) * per_value[x].total;
    });
    LabelHistogram left(classes_);
    double top = 0.0;
    std::size_t top_len = 0;
    for (std::size_t len = 1; len < order.size(); ++len) {
      const LabelHistogram& add = per_value[order[len - 1]];
      for (ClassId c = 0; c < classes_; ++c) left.add(c, add.counts[c]);
      if (left.total < cfg_.min_records || h.total - left.total < cfg_.min_records) continue;
      const double score = split_score(h, left, cfg_.criterion);
      if (score > top) {
        top = score;
        top_len = len;
      }
    }
    if (top_len == 0) return;
    std::vector<std::uint32_t> in(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_len));
    std::vector<std::uint32_t> out(order.begin() + static_cast<std::ptrdiff_t>(top_len), order.end());
    std::sort(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    offer(best, j, CategoricalCondition{std::min(in, out)}, top);
  }

  // Breadth-first renumbering: children get consecutive ids in the order
  // their parents are visited, positive child first.
  DecisionTree flatten(const RawNode& root) const {
    DecisionTree tree;
    tree.index = p_;
    std::deque<std::pair<const RawNode*, NodeId>> queue;
    auto emit = [&](const RawNode& raw, NodeId parent) {
      TreeNode n;
      n.id = static_cast<NodeId>(tree.nodes.size());
      n.depth = raw.depth;
      n.parent = parent;
      n.distribution = raw.distribution;
      n.reason = raw.reason;
      tree.nodes.push_back(n);
      queue.emplace_back(&raw, n.id);
    };
    emit(root, kNoNode);
    while (!queue.empty()) {
      auto [raw, id] = queue.front();
      queue.pop_front();
      if (raw->reason != LeafReason::kInternal) continue;
      const NodeId pos = static_cast<NodeId>(tree.nodes.size());
      emit(*raw->positive, id);
      emit(*raw->negative, id);
      TreeNode& n = tree.nodes[id];
      n.feature = raw->feature;
      n.condition = raw->condition;
      n.score = raw->score;
      n.positive = pos;
      n.negative = pos + 1;
    }
    return tree;
  }

  const PreparedDataset& ds_;
  const TrainConfig& cfg_;
  const SeedContext& ctx_;
  TreeIndex p_;
  std::uint32_t classes_;
  std::vector<std::vector<double>> numeric_;
  std::vector<std::vector<std::uint32_t>> category_;
};

void check_cap(const PreparedDataset& ds, const TrainConfig& cfg) {
  const std::uint64_t cells = std::uint64_t{ds.n()} * std::max<std::uint64_t>(ds.m(), 1);
  if (cells > cfg.oracle_cell_cap) {
    throw Error(Errc::kOutOfMemoryGuard, "reference trainer limited to " +
                                             std::to_string(cfg.oracle_cell_cap) + " cells, got " +
                                             std::to_string(cells));
  }
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::string describe(const Condition& c) {
  if (const auto* n = std::get_if<NumericalCondition>(&c)) return "<= " + hex(n->threshold);
  std::string out = "in {";
  const auto& s = std::get<CategoricalCondition>(c).subset;
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
  return out + "}";
}

std::string describe(const LabelHistogram& h) {
  std::string out = "[";
  for (std::size_t k = 0; k < h.counts.size(); ++k) out += (k ? "," : "") + std::to_string(h.counts[k]);
  return out + "]";
}

}  // namespace

DecisionTree train_reference_tree(const PreparedDataset& ds, const TrainConfig& cfg,
                                  const SeedContext& ctx, TreeIndex p) {
  check_cap(ds, cfg);
  if (ds.m() == 0) throw Error(Errc::kInvalidArgument, "dataset has no feature columns");
  return ReferenceTrainer(ds, cfg, ctx, p).train();
}

Forest train_reference_forest(const PreparedDataset& ds, const TrainConfig& cfg,
                              const SeedContext& ctx) {
  check_cap(ds, cfg);
  Forest forest;
  forest.num_classes = ds.num_classes();
  for (const auto& s : ds.specs) forest.kinds.push_back(s.kind);
  for (TreeIndex p = 0; p < cfg.num_trees; ++p) {
    forest.trees.push_back(train_reference_tree(ds, cfg, ctx, p));
  }
  return forest;
}

ForestComparison trees_equal(const DecisionTree& a, const DecisionTree& b) {
  ForestComparison out;
  auto fail = [&](const std::string& what) {
    out.equal = false;
    out.divergence = "tree " + std::to_string(a.index) + ": " + what;
    return out;
  };
  if (a.index != b.index) return fail("index " + std::to_string(b.index) + " on the right");
  const std::size_t common = std::min(a.nodes.size(), b.nodes.size());
  for (std::size_t k = 0; k < common; ++k) {
    const TreeNode& x = a.nodes[k];
    const TreeNode& y = b.nodes[k];
    const std::string at = "node " + std::to_string(k) + " (depth " + std::to_string(x.depth) + ")";
    if (x.depth != y.depth || x.parent != y.parent) return fail(at + ": position differs");
    if (x.reason != y.reason) {
      return fail(at + ": " + std::string(leaf_reason_name(x.reason)) + " vs " +
                  std::string(leaf_reason_name(y.reason)));
    }
    if (x.distribution != y.distribution) {
      return fail(at + ": distribution " + describe(x.distribution) + " vs " + describe(y.distribution));
    }
    if (x.is_leaf()) continue;
    if (x.feature != y.feature) {
      return fail(at + ": feature " + std::to_string(x.feature) + " vs " + std::to_string(y.feature));
    }
    if (!(x.condition == y.condition)) {
      return fail(at + ": condition " + describe(x.condition) + " vs " + describe(y.condition));
    }
    if (x.score != y.score) return fail(at + ": score " + hex(x.score) + " vs " + hex(y.score));
    if (x.positive != y.positive || x.negative != y.negative) return fail(at + ": children differ");
  }
  if (a.nodes.size() != b.nodes.size()) {
    return fail("node count " + std::to_string(a.nodes.size()) + " vs " + std::to_string(b.nodes.size()));
  }
  return out;
}

ForestComparison forests_equal(const Forest& a, const Forest& b) {
  ForestComparison out;
  if (a.num_classes != b.num_classes || a.kinds != b.kinds) {
    out.equal = false;
    out.divergence = "forest schema differs";
    return out;
  }
  if (a.trees.size() != b.trees.size()) {
    out.equal = false;
    out.divergence = "tree count " + std::to_string(a.trees.size()) + " vs " +
                     std::to_string(b.trees.size());
    return out;
  }
  for (std::size_t p = 0; p < a.trees.size(); ++p) {
    out = trees_equal(a.trees[p], b.trees[p]);
    if (!out.equal) return out;
  }
  return out;
}

}  // namespace drf
