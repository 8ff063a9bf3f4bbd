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

#include "drf/split.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace drf {

std::string_view criterion_name(Criterion c) {
  return c == Criterion::kGini ? "gini" : "infogain";
}

Criterion parse_criterion(std::string_view name) {
  if (name == "gini") return Criterion::kGini;
  if (name == "infogain" || name == "entropy") return Criterion::kInfoGain;
  throw Error(Errc::kInvalidArgument, "unknown criterion '" + std::string(name) + "'");
}

bool LabelHistogram::pure() const {
  int nonzero = 0;
  for (auto c : counts) nonzero += (c != 0);
  return nonzero <= 1;
}

LabelHistogram LabelHistogram::minus(const LabelHistogram& part) const {
  LabelHistogram out(static_cast<std::uint32_t>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) out.counts[k] = counts[k] - part.counts[k];
  out.total = total - part.total;
  return out;
}

ClassId LabelHistogram::argmax() const {
  ClassId best = 0;
  for (ClassId k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return best;
}

namespace {

// w * impurity(c / w), i.e. the unnormalized impurity of one branch.
double weighted_impurity(const std::uint64_t* c, std::uint64_t w, std::uint32_t classes,
                         Criterion criterion, const std::uint64_t* minus = nullptr) {
  const double wd = static_cast<double>(w);
  if (criterion == Criterion::kInfoGain) {
    double sum = 0.0;
    for (std::uint32_t k = 0; k < classes; ++k) {
      const std::uint64_t ck = minus ? c[k] - minus[k] : c[k];
      if (ck != 0) {
        const double p = static_cast<double>(ck) / wd;
        sum -= p * std::log2(p);
      }
    }
    return wd * sum;
  }
  double sq = 0.0;
  for (std::uint32_t k = 0; k < classes; ++k) {
    const std::uint64_t ck = minus ? c[k] - minus[k] : c[k];
    const double p = static_cast<double>(ck) / wd;
    sq += p * p;
  }
  return wd * (1.0 - sq);
}

}  // namespace

double split_score(const std::uint64_t* parent, const std::uint64_t* pos, std::uint32_t classes,
                   std::uint64_t parent_total, std::uint64_t pos_total, Criterion criterion) {
  const std::uint64_t neg_total = parent_total - pos_total;
  if (pos_total == 0 || neg_total == 0) return 0.0;
  // Same class proportions in both branches: exactly no improvement.
  bool proportional = true;
  for (std::uint32_t k = 0; k < classes && proportional; ++k) {
    proportional = static_cast<unsigned __int128>(pos[k]) * parent_total ==
                   static_cast<unsigned __int128>(parent[k]) * pos_total;
  }
  if (proportional) return 0.0;
  const double w = static_cast<double>(parent_total);
  const double parent_impurity = weighted_impurity(parent, parent_total, classes, criterion) / w;
  const double children = weighted_impurity(pos, pos_total, classes, criterion) +
                          weighted_impurity(parent, neg_total, classes, criterion, pos);
  const double gain = parent_impurity - children / w;
  return gain > 0.0 ? gain : 0.0;
}

double split_score(const LabelHistogram& parent, const LabelHistogram& pos, Criterion criterion) {
  if (parent.counts.size() != pos.counts.size()) {
    throw Error(Errc::kHistogramInconsistent, "class count mismatch");
  }
  for (std::size_t k = 0; k < parent.counts.size(); ++k) {
    if (pos.counts[k] > parent.counts[k]) {
      throw Error(Errc::kHistogramInconsistent,
                  "branch count exceeds parent for class " + std::to_string(k));
    }
  }
  if (parent.total == 0) throw Error(Errc::kHistogramInconsistent, "empty parent");
  return split_score(parent.counts.data(), pos.counts.data(),
                     static_cast<std::uint32_t>(parent.counts.size()), parent.total, pos.total,
                     criterion);
}

bool categorical_holds(const CategoricalCondition& c, std::uint32_t x) {
  return std::binary_search(c.subset.begin(), c.subset.end(), x);
}

double split_threshold(double v, double a) {
  const double t = std::midpoint(v, a);
  return t < a ? t : v;
}

bool better_candidate(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.feature != b.feature) return a.feature < b.feature;
  const auto* na = std::get_if<NumericalCondition>(&a.condition);
  const auto* nb = std::get_if<NumericalCondition>(&b.condition);
  if (na && nb) return na->threshold < nb->threshold;
  const auto* ca = std::get_if<CategoricalCondition>(&a.condition);
  const auto* cb = std::get_if<CategoricalCondition>(&b.condition);
  if (ca && cb) return ca->subset < cb->subset;
  return na != nullptr;
}

SuperSplit merge_supersplits(std::span<const SuperSplit> parts) {
  SuperSplit merged;
  for (const auto& part : parts) {
    for (const auto& [leaf, candidate] : part) {
      auto [it, inserted] = merged.emplace(leaf, candidate);
      if (!inserted && better_candidate(candidate, it->second)) it->second = candidate;
    }
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Numerical search.

SuperSplit numerical_supersplit(FeatureIndex feature, std::span<const NumericalEntry> entries,
                                const ClassList& cl, std::span<const std::uint8_t> bags,
                                std::span<const OpenLeaf> leaves, const CandidateMask& candidates,
                                const ScanParams& params) {
  const std::size_t num_leaves = leaves.size();
  const std::uint32_t classes = params.num_classes;
  std::vector<std::uint64_t> prefix(num_leaves * classes, 0);
  std::vector<std::uint64_t> prefix_total(num_leaves, 0);
  std::vector<double> last(num_leaves, 0.0);
  std::vector<double> best_score(num_leaves, 0.0);
  std::vector<double> best_threshold(num_leaves, 0.0);
  std::vector<std::uint64_t> best_prefix(num_leaves * classes, 0);
  std::vector<std::uint64_t> best_prefix_total(num_leaves, 0);

  for (const NumericalEntry& e : entries) {
    const std::uint32_t s = cl.slot(e.sample);
    if (s == ClassList::kClosedSlot || !candidates[s]) continue;
    const std::uint8_t b = bags[e.sample];
    if (b == 0) continue;
    std::uint64_t* h = &prefix[std::size_t{s} * classes];
    const std::uint64_t seen = prefix_total[s];
    if (seen > 0 && e.value > last[s]) {
      const LabelHistogram& parent = leaves[s].histogram;
      const std::uint64_t rest = parent.total - seen;
      if (seen >= params.min_records && rest >= params.min_records) {
        const double score =
            split_score(parent.counts.data(), h, classes, parent.total, seen, params.criterion);
        if (score > best_score[s]) {
          best_score[s] = score;
          best_threshold[s] = split_threshold(last[s], e.value);
          std::copy(h, h + classes, &best_prefix[std::size_t{s} * classes]);
          best_prefix_total[s] = seen;
        }
      }
    }
    h[e.label] += b;
    prefix_total[s] = seen + b;
    last[s] = e.value;
  }

  SuperSplit out;
  for (std::size_t s = 0; s < num_leaves; ++s) {
    if (best_score[s] <= 0.0) continue;
    SplitCandidate c;
    c.leaf = leaves[s].id;
    c.feature = feature;
    c.condition = NumericalCondition{best_threshold[s]};
    c.score = best_score[s];
    c.positive = LabelHistogram(classes);
    std::copy_n(&best_prefix[s * classes], classes, c.positive.counts.begin());
    c.positive.total = best_prefix_total[s];
    c.negative = leaves[s].histogram.minus(c.positive);
    out.emplace(c.leaf, std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Categorical search.

void BiHistogram::merge(const BiHistogram& other) {
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
}

std::optional<SplitCandidate> best_categorical_split(const BiHistogram& hist,
                                                     const LabelHistogram& parent,
                                                     const ScanParams& params) {
  const std::uint32_t classes = hist.classes;
  std::vector<std::uint32_t> present;
  std::vector<std::uint64_t> weight(hist.arity, 0);
  for (std::uint32_t v = 0; v < hist.arity; ++v) {
    for (std::uint32_t k = 0; k < classes; ++k) weight[v] += hist.counts[std::size_t{v} * classes + k];
    if (weight[v] > 0) present.push_back(v);
  }
  if (present.size() < 2) return std::nullopt;
  const ClassId ranked = classes == 2 ? 1 : parent.argmax();
  auto count_of = [&](std::uint32_t v) { return hist.counts[std::size_t{v} * classes + ranked]; };
  std::stable_sort(present.begin(), present.end(), [&](std::uint32_t x, std::uint32_t y) {
    // count_x / weight_x < count_y / weight_y, exactly.
    return static_cast<unsigned __int128>(count_of(x)) * weight[y] <
           static_cast<unsigned __int128>(count_of(y)) * weight[x];
  });

  std::vector<std::uint64_t> pos(classes, 0);
  std::uint64_t pos_total = 0;
  double best = 0.0;
  std::size_t best_len = 0;
  for (std::size_t len = 1; len < present.size(); ++len) {
    const std::uint32_t v = present[len - 1];
    for (std::uint32_t k = 0; k < classes; ++k) pos[k] += hist.counts[std::size_t{v} * classes + k];
    pos_total += weight[v];
    if (pos_total < params.min_records || parent.total - pos_total < params.min_records) continue;
    const double score = split_score(parent.counts.data(), pos.data(), classes, parent.total,
                                     pos_total, params.criterion);
    if (score > best) {
      best = score;
      best_len = len;
    }
  }
  if (best_len == 0) return std::nullopt;

  std::vector<std::uint32_t> subset(present.begin(), present.begin() + static_cast<std::ptrdiff_t>(best_len));
  std::vector<std::uint32_t> complement(present.begin() + static_cast<std::ptrdiff_t>(best_len), present.end());
  std::sort(subset.begin(), subset.end());
  std::sort(complement.begin(), complement.end());
  // Both sides describe the same partition of the seen categories; keep the
  // lexicographically smaller one as the positive branch.
  if (complement < subset) std::swap(subset, complement);

  SplitCandidate c;
  c.score = best;
  c.positive = LabelHistogram(classes);
  for (std::uint32_t v : subset) {
    for (std::uint32_t k = 0; k < classes; ++k) {
      c.positive.add(k, hist.counts[std::size_t{v} * classes + k]);
    }
  }
  c.negative = parent.minus(c.positive);
  c.condition = CategoricalCondition{std::move(subset)};
  return c;
}

namespace {

SuperSplit finish_categorical(FeatureIndex feature, std::vector<BiHistogram>& per_leaf,
                              std::span<const OpenLeaf> leaves, const CandidateMask& candidates,
                              const ScanParams& params) {
  SuperSplit out;
  for (std::size_t s = 0; s < leaves.size(); ++s) {
    if (!candidates[s]) continue;
    auto c = best_categorical_split(per_leaf[s], leaves[s].histogram, params);
    if (!c) continue;
    c->leaf = leaves[s].id;
    c->feature = feature;
    out.emplace(c->leaf, std::move(*c));
  }
  return out;
}

std::vector<BiHistogram> empty_bihistograms(std::uint32_t arity, std::span<const OpenLeaf> leaves,
                                            const CandidateMask& candidates,
                                            std::uint32_t classes) {
  std::vector<BiHistogram> per_leaf(leaves.size());
  for (std::size_t s = 0; s < leaves.size(); ++s) {
    if (candidates[s]) per_leaf[s] = BiHistogram(arity, classes);
  }
  return per_leaf;
}

}  // namespace

SuperSplit categorical_supersplit(FeatureIndex feature, std::uint32_t arity,
                                  std::span<const CategoricalEntry> values,
                                  std::span<const SampleIndex> shard_bounds, const ClassList& cl,
                                  std::span<const std::uint8_t> bags,
                                  std::span<const OpenLeaf> leaves,
                                  const CandidateMask& candidates, const ScanParams& params,
                                  unsigned threads) {
  std::vector<SampleIndex> bounds(shard_bounds.begin(), shard_bounds.end());
  if (bounds.size() < 2) bounds = {0, values.size()};
  const std::size_t shards = bounds.size() - 1;
  std::vector<std::vector<BiHistogram>> partial(shards);
  auto accumulate = [&](std::size_t k) {
    auto per_leaf = empty_bihistograms(arity, leaves, candidates, params.num_classes);
    for (SampleIndex i = bounds[k]; i < bounds[k + 1]; ++i) {
      const std::uint32_t s = cl.slot(i);
      if (s == ClassList::kClosedSlot || !candidates[s]) continue;
      const std::uint8_t b = bags[i];
      if (b == 0) continue;
      const CategoricalEntry& e = values[i];
      if (e.value >= arity) continue;
      per_leaf[s].add(e.value, e.label, b);
    }
    partial[k] = std::move(per_leaf);
  };
  if (threads > 1 && shards > 1) {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, shards); ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < shards; k += threads) accumulate(k);
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t k = 0; k < shards; ++k) accumulate(k);
  }
  std::vector<BiHistogram> merged = std::move(partial[0]);
  for (std::size_t k = 1; k < shards; ++k) {
    for (std::size_t s = 0; s < merged.size(); ++s) {
      if (candidates[s]) merged[s].merge(partial[k][s]);
    }
  }
  return finish_categorical(feature, merged, leaves, candidates, params);
}

SuperSplit categorical_supersplit(FeatureIndex feature, std::uint32_t arity,
                                  std::span<const IndexedCategoricalEntry> entries,
                                  const ClassList& cl, std::span<const std::uint8_t> bags,
                                  std::span<const OpenLeaf> leaves,
                                  const CandidateMask& candidates, const ScanParams& params) {
  auto per_leaf = empty_bihistograms(arity, leaves, candidates, params.num_classes);
  for (const auto& e : entries) {
    const std::uint32_t s = cl.slot(e.sample);
    if (s == ClassList::kClosedSlot || !candidates[s]) continue;
    const std::uint8_t b = bags[e.sample];
    if (b == 0 || e.value >= arity) continue;
    per_leaf[s].add(e.value, e.label, b);
  }
  return finish_categorical(feature, per_leaf, leaves, candidates, params);
}

// ---------------------------------------------------------------------------
// Condition evaluation.

ConditionBitmap evaluate_numerical(std::span<const NumericalEntry> entries, const ClassList& cl,
                                   std::span<const std::uint8_t> bags,
                                   const SlotConditions& conditions) {
  // Bits are produced in attribute order, then compacted to sample order.
  ConditionBitmap by_sample(cl.n());
  std::size_t handled = 0;
  for (const NumericalEntry& e : entries) {
    const std::uint32_t s = cl.slot(e.sample);
    if (s == ClassList::kClosedSlot || conditions[s] == nullptr || bags[e.sample] == 0) continue;
    const auto& c = std::get<NumericalCondition>(*conditions[s]);
    by_sample.set(e.sample, numerical_holds(c, e.value));
    ++handled;
  }
  ConditionBitmap out;
  for (SampleIndex i = 0; i < cl.n(); ++i) {
    const std::uint32_t s = cl.slot(i);
    if (s == ClassList::kClosedSlot || conditions[s] == nullptr || bags[i] == 0) continue;
    out.push_back(by_sample.get(i));
  }
  if (out.size() != handled) {
    throw Error(Errc::kBitmapLengthMismatch, "attribute list does not cover every open sample");
  }
  return out;
}

ConditionBitmap evaluate_categorical(std::span<const CategoricalEntry> values,
                                     const ClassList& cl, std::span<const std::uint8_t> bags,
                                     const SlotConditions& conditions) {
  ConditionBitmap out;
  for (SampleIndex i = 0; i < values.size(); ++i) {
    const std::uint32_t s = cl.slot(i);
    if (s == ClassList::kClosedSlot || conditions[s] == nullptr || bags[i] == 0) continue;
    out.push_back(categorical_holds(std::get<CategoricalCondition>(*conditions[s]), values[i].value));
  }
  return out;
}

ConditionBitmap evaluate_categorical(std::span<const IndexedCategoricalEntry> entries,
                                     const ClassList& cl, std::span<const std::uint8_t> bags,
                                     const SlotConditions& conditions) {
  ConditionBitmap out;
  for (const auto& e : entries) {
    const std::uint32_t s = cl.slot(e.sample);
    if (s == ClassList::kClosedSlot || conditions[s] == nullptr || bags[e.sample] == 0) continue;
    out.push_back(categorical_holds(std::get<CategoricalCondition>(*conditions[s]), e.value));
  }
  return out;
}

}  // namespace drf
