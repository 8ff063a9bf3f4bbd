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

#ifndef DRF_DATASET_H_
#define DRF_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "drf/common.h"

namespace drf {

enum class ColumnKind : std::uint8_t { kNumerical = 0, kCategorical = 1 };

inline constexpr std::uint32_t kMaxArity = 1u << 16;
// Value id used for categories that are not in the frozen dictionary. It never
// belongs to a split subset, so such values follow the negative branch.
inline constexpr std::uint32_t kOutOfDictionary = 0xFFFFFFFFu;

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumerical;
  // Categorical only: value id k encodes dictionary[k].
  std::vector<std::string> dictionary;
  std::uint32_t column_index = 0;

  std::optional<std::uint32_t> arity() const {
    if (kind != ColumnKind::kCategorical) return std::nullopt;
    return static_cast<std::uint32_t>(dictionary.size());
  }
  bool operator==(const ColumnSpec&) const = default;
};

// Attribute-list tuple.
struct NumericalEntry {
  double value;
  ClassId label;
  SampleIndex sample;
  bool operator==(const NumericalEntry&) const = default;
};

// Presort order: ascending value, ties by ascending sample index.
inline bool attribute_order(const NumericalEntry& a, const NumericalEntry& b) {
  if (a.value < b.value) return true;
  if (b.value < a.value) return false;
  return a.sample < b.sample;
}

struct NumericalAttributeList {
  std::vector<NumericalEntry> entries;
  bool sorted = false;
};

struct CategoricalEntry {
  std::uint32_t value;
  ClassId label;
  bool operator==(const CategoricalEntry&) const = default;
};

// Stored in sample-index order; shard k holds samples [bounds[k], bounds[k+1]).
struct CategoricalColumn {
  std::vector<CategoricalEntry> values;
  std::vector<SampleIndex> shard_bounds;
};

using Column = std::variant<NumericalAttributeList, CategoricalColumn>;

struct PreparedDataset {
  std::vector<ColumnSpec> specs;
  std::vector<Column> columns;
  std::vector<ClassId> labels;
  std::vector<std::string> class_names;
  std::vector<SampleIndex> shard_bounds;

  std::size_t n() const { return labels.size(); }
  std::size_t m() const { return columns.size(); }
  std::uint32_t num_classes() const {
    return static_cast<std::uint32_t>(class_names.size());
  }
  bool is_sorted() const;

  const NumericalAttributeList& numerical(FeatureIndex j) const {
    return std::get<NumericalAttributeList>(columns.at(j));
  }
  const CategoricalColumn& categorical(FeatureIndex j) const {
    return std::get<CategoricalColumn>(columns.at(j));
  }
};

// Column data in sample order, before label embedding.
using ColumnValues = std::variant<std::vector<double>, std::vector<std::uint32_t>>;

// Unparsed tabular input: one feature cell vector and one label per row.
struct RawRows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> labels;
};

enum class IngestMode {
  kStrict,  // Unknown categories are an error (training data).
  kLenient  // Unknown categories map to kOutOfDictionary (evaluation data).
};

// Builds a dataset from typed columns; sample index = position.
PreparedDataset from_columns(std::vector<ColumnSpec> specs,
                             std::vector<ColumnValues> values,
                             std::vector<ClassId> labels,
                             std::vector<std::string> class_names,
                             std::size_t shards = 1);

PreparedDataset ingest(const RawRows& rows, std::vector<ColumnSpec> specs,
                       std::vector<std::string> class_names,
                       IngestMode mode = IngestMode::kStrict,
                       std::size_t shards = 1);

// A column is categorical when any cell fails to parse as a real number.
// Dictionaries and class names are sorted lexicographically.
std::vector<ColumnSpec> infer_specs(const RawRows& rows);
std::vector<std::string> infer_class_names(const RawRows& rows);

RawRows read_csv(const std::filesystem::path& path,
                 const std::string& label_column);
void write_csv(const std::filesystem::path& path, const PreparedDataset& ds,
               const std::string& label_column = "label");

std::vector<SampleIndex> shard_bounds(std::size_t n, std::size_t shards);

struct PresortStats {
  // Maximum over numerical columns of the number of merge passes.
  std::size_t merge_passes = 0;
  std::size_t initial_runs = 0;
  std::size_t spilled_bytes = 0;
};

// Sorts every numerical column. Columns larger than `memory_budget` entries
// are sorted externally through spill files in `spill_dir` (a fresh temporary
// directory when empty).
PreparedDataset presort(PreparedDataset ds, std::size_t memory_budget,
                        PresortStats* stats = nullptr,
                        const std::filesystem::path& spill_dir = {});

// Multiway merge sort in `attribute_order` with at most `memory_budget`
// entries resident per run; fan-in is memory_budget - 1.
std::vector<NumericalEntry> external_sort(std::vector<NumericalEntry> entries,
                                          std::size_t memory_budget,
                                          const std::filesystem::path& spill_dir,
                                          PresortStats* stats = nullptr);

// Sample-ordered values of column j (undoes the presort permutation).
std::vector<double> numerical_values(const PreparedDataset& ds, FeatureIndex j);
std::vector<std::uint32_t> categorical_values(const PreparedDataset& ds,
                                              FeatureIndex j);

// Row-access view used for prediction.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(const PreparedDataset& ds);

  std::size_t n() const { return n_; }
  std::size_t m() const { return kinds_.size(); }
  ColumnKind kind(FeatureIndex j) const { return kinds_[j]; }
  double numerical(SampleIndex i, FeatureIndex j) const {
    return numeric_[j][i];
  }
  std::uint32_t categorical(SampleIndex i, FeatureIndex j) const {
    return category_[j][i];
  }
  // Column j replaced by a permutation of its values (importance probes).
  void permute_column(FeatureIndex j, const std::vector<SampleIndex>& from);

 private:
  std::size_t n_ = 0;
  std::vector<ColumnKind> kinds_;
  std::vector<std::vector<double>> numeric_;
  std::vector<std::vector<std::uint32_t>> category_;
};

// On-disk layout: <dir>/manifest.json, <dir>/labels.bin, <dir>/col_<j>.bin.
inline constexpr std::uint32_t kDatasetFormatVersion = 1;
void save_dataset(const PreparedDataset& ds, const std::filesystem::path& dir);
PreparedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace drf

#endif  // DRF_DATASET_H_
