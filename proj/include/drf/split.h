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

#ifndef DRF_SPLIT_H_
#define DRF_SPLIT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "drf/bitmap.h"
#include "drf/classlist.h"
#include "drf/common.h"
#include "drf/dataset.h"

namespace drf {

enum class Criterion : std::uint8_t { kGini = 0, kInfoGain = 1 };

std::string_view criterion_name(Criterion c);
Criterion parse_criterion(std::string_view name);

// Bag-weighted class counts.
struct LabelHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  LabelHistogram() = default;
  explicit LabelHistogram(std::uint32_t num_classes) : counts(num_classes, 0) {}
  LabelHistogram(std::initializer_list<std::uint64_t> c) : counts(c) {
    for (auto v : counts) total += v;
  }

  void add(ClassId y, std::uint64_t weight) {
    counts[y] += weight;
    total += weight;
  }
  bool pure() const;
  // Complement with respect to `parent`.
  LabelHistogram minus(const LabelHistogram& part) const;
  ClassId argmax() const;

  bool operator==(const LabelHistogram&) const = default;
};

// Score of splitting `parent` into `pos` and parent - pos; 0 when either branch
// is empty or when the branches have the parent's class proportions.
double split_score(const LabelHistogram& parent, const LabelHistogram& pos, Criterion criterion);

// Hot-path variant over raw count arrays, identical arithmetic.
double split_score(const std::uint64_t* parent, const std::uint64_t* pos, std::uint32_t classes,
                   std::uint64_t parent_total, std::uint64_t pos_total, Criterion criterion);

// Condition x <= threshold.
struct NumericalCondition {
  double threshold;
  bool operator==(const NumericalCondition&) const = default;
};

// Condition x in subset (sorted value ids).
struct CategoricalCondition {
  std::vector<std::uint32_t> subset;
  bool operator==(const CategoricalCondition&) const = default;
};

using Condition = std::variant<NumericalCondition, CategoricalCondition>;

inline bool numerical_holds(const NumericalCondition& c, double x) { return x <= c.threshold; }
bool categorical_holds(const CategoricalCondition& c, std::uint32_t x);

// Threshold between two consecutive distinct values v < a of a leaf: the
// midpoint, pulled back to v when rounding would land on a.
double split_threshold(double v, double a);

struct SplitCandidate {
  NodeId leaf = 0;
  FeatureIndex feature = 0;
  Condition condition = NumericalCondition{0.0};
  double score = 0.0;
  LabelHistogram positive;
  LabelHistogram negative;

  bool operator==(const SplitCandidate&) const = default;
};

// Tie order for candidates of equal score: lower feature, then lower
// threshold, then lexicographically smaller subset.
bool better_candidate(const SplitCandidate& a, const SplitCandidate& b);

// Best candidate per open leaf. Leaves without a candidate are absent.
using SuperSplit = std::map<NodeId, SplitCandidate>;

SuperSplit merge_supersplits(std::span<const SuperSplit> parts);

// Leaf of the current depth as seen by the splitters.
struct OpenLeaf {
  NodeId id = 0;
  std::uint64_t key = 0;
  LabelHistogram histogram;
  bool operator==(const OpenLeaf&) const = default;
};

struct ScanParams {
  Criterion criterion = Criterion::kGini;
  std::uint64_t min_records = 1;
  std::uint32_t num_classes = 2;
};

// Per-slot flags: whether the scanned feature is a candidate of that leaf.
using CandidateMask = std::vector<char>;

// Single pass over an attribute list (or a pruned copy of one).
SuperSplit numerical_supersplit(FeatureIndex feature, std::span<const NumericalEntry> entries,
                                const ClassList& cl, std::span<const std::uint8_t> bags,
                                std::span<const OpenLeaf> leaves, const CandidateMask& candidates,
                                const ScanParams& params);

// Categorical entry carrying its sample index (pruned copies).
struct IndexedCategoricalEntry {
  std::uint32_t value;
  ClassId label;
  SampleIndex sample;
};

// Bi-histogram of one leaf: counts[value * classes + label].
struct BiHistogram {
  std::uint32_t arity = 0;
  std::uint32_t classes = 0;
  std::vector<std::uint64_t> counts;

  BiHistogram() = default;
  BiHistogram(std::uint32_t arity_, std::uint32_t classes_)
      : arity(arity_), classes(classes_), counts(std::size_t{arity_} * classes_, 0) {}
  void add(std::uint32_t value, ClassId label, std::uint64_t weight) {
    counts[std::size_t{value} * classes + label] += weight;
  }
  void merge(const BiHistogram& other);
};

// Best subset condition from a bi-histogram. Binary labels: categories ranked
// by positive-class rate, best prefix (exact). Multiclass: ranked by the rate
// of the parent's majority class, best prefix (approximate).
std::optional<SplitCandidate> best_categorical_split(const BiHistogram& hist,
                                                     const LabelHistogram& parent,
                                                     const ScanParams& params);

// Accumulation runs per shard (bounds over sample index) and merges per-shard
// bi-histograms in shard order; `threads` > 1 processes shards concurrently.
SuperSplit categorical_supersplit(FeatureIndex feature, std::uint32_t arity,
                                  std::span<const CategoricalEntry> values,
                                  std::span<const SampleIndex> shard_bounds, const ClassList& cl,
                                  std::span<const std::uint8_t> bags,
                                  std::span<const OpenLeaf> leaves,
                                  const CandidateMask& candidates, const ScanParams& params,
                                  unsigned threads = 1);

SuperSplit categorical_supersplit(FeatureIndex feature, std::uint32_t arity,
                                  std::span<const IndexedCategoricalEntry> entries,
                                  const ClassList& cl, std::span<const std::uint8_t> bags,
                                  std::span<const OpenLeaf> leaves,
                                  const CandidateMask& candidates, const ScanParams& params);

// Conditions to evaluate, indexed by class-list slot (nullptr: leaf not
// handled by this call).
using SlotConditions = std::vector<const Condition*>;

ConditionBitmap evaluate_numerical(std::span<const NumericalEntry> entries, const ClassList& cl,
                                   std::span<const std::uint8_t> bags,
                                   const SlotConditions& conditions);

ConditionBitmap evaluate_categorical(std::span<const CategoricalEntry> values,
                                     const ClassList& cl, std::span<const std::uint8_t> bags,
                                     const SlotConditions& conditions);

ConditionBitmap evaluate_categorical(std::span<const IndexedCategoricalEntry> entries,
                                     const ClassList& cl, std::span<const std::uint8_t> bags,
                                     const SlotConditions& conditions);

}  // namespace drf

#endif  // DRF_SPLIT_H_
