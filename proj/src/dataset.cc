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

#include "drf/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "drf/bytes.h"
#include "json.hpp"

namespace drf {

namespace {

bool parse_real(const std::string& cell, double* out) {
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  if (begin == end) return false;
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  // Missing values are out of scope; "nan" and "inf" are rejected.
  return ec == std::errc() && ptr == end && std::isfinite(*out);
}

void check_arity(const ColumnSpec& spec) {
  if (spec.kind == ColumnKind::kCategorical &&
      spec.dictionary.size() > kMaxArity) {
    throw Error(Errc::kArityOverflow,
                "column '" + spec.name + "' has " +
                    std::to_string(spec.dictionary.size()) + " categories");
  }
}

}  // namespace

bool PreparedDataset::is_sorted() const {
  for (const auto& column : columns) {
    if (auto* list = std::get_if<NumericalAttributeList>(&column)) {
      if (!list->sorted) return false;
    }
  }
  return true;
}

std::vector<SampleIndex> shard_bounds(std::size_t n, std::size_t shards) {
  if (shards == 0) throw Error(Errc::kInvalidArgument, "shard count must be >= 1");
  std::vector<SampleIndex> bounds(shards + 1);
  const std::size_t base = n / shards;
  const std::size_t extra = n % shards;
  bounds[0] = 0;
  for (std::size_t k = 0; k < shards; ++k) {
    bounds[k + 1] = bounds[k] + base + (k < extra ? 1 : 0);
  }
  return bounds;
}

PreparedDataset from_columns(std::vector<ColumnSpec> specs,
                             std::vector<ColumnValues> values,
                             std::vector<ClassId> labels,
                             std::vector<std::string> class_names,
                             std::size_t shards) {
  if (specs.size() != values.size()) {
    throw Error(Errc::kRaggedRow, "column spec count does not match data");
  }
  const std::size_t n = labels.size();
  for (ClassId y : labels) {
    if (y >= class_names.size()) {
      throw Error(Errc::kInvalidArgument, "label id " + std::to_string(y) +
                                              " outside class dictionary");
    }
  }
  PreparedDataset ds;
  ds.labels = std::move(labels);
  ds.class_names = std::move(class_names);
  ds.shard_bounds = shard_bounds(n, shards);
  ds.columns.reserve(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    ColumnSpec& spec = specs[j];
    spec.column_index = static_cast<std::uint32_t>(j);
    check_arity(spec);
    if (spec.kind == ColumnKind::kNumerical) {
      auto* raw = std::get_if<std::vector<double>>(&values[j]);
      if (raw == nullptr) {
        throw Error(Errc::kInvalidArgument, "column '" + spec.name + "' expects reals");
      }
      if (raw->size() != n) throw Error(Errc::kRaggedRow, "column '" + spec.name + "' length");
      NumericalAttributeList list;
      list.entries.reserve(n);
      for (SampleIndex i = 0; i < n; ++i) {
        if (!std::isfinite((*raw)[i])) {
          throw Error(Errc::kInvalidArgument, "column '" + spec.name + "' has a non-finite value");
        }
        list.entries.push_back({(*raw)[i], ds.labels[i], i});
      }
      ds.columns.emplace_back(std::move(list));
    } else {
      auto* raw = std::get_if<std::vector<std::uint32_t>>(&values[j]);
      if (raw == nullptr) {
        throw Error(Errc::kInvalidArgument, "column '" + spec.name + "' expects value ids");
      }
      if (raw->size() != n) throw Error(Errc::kRaggedRow, "column '" + spec.name + "' length");
      CategoricalColumn column;
      column.values.reserve(n);
      for (SampleIndex i = 0; i < n; ++i) {
        const std::uint32_t v = (*raw)[i];
        if (v >= spec.dictionary.size() && v != kOutOfDictionary) {
          throw Error(Errc::kUnknownCategory,
                      "value id " + std::to_string(v) + " in column '" + spec.name + "'");
        }
        column.values.push_back({v, ds.labels[i]});
      }
      column.shard_bounds = ds.shard_bounds;
      ds.columns.emplace_back(std::move(column));
    }
  }
  ds.specs = std::move(specs);
  return ds;
}

PreparedDataset ingest(const RawRows& rows, std::vector<ColumnSpec> specs,
                       std::vector<std::string> class_names, IngestMode mode,
                       std::size_t shards) {
  const std::size_t n = rows.cells.size();
  if (rows.labels.size() != n) throw Error(Errc::kRaggedRow, "label count mismatch");
  std::vector<std::unordered_map<std::string, std::uint32_t>> dictionaries(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    check_arity(specs[j]);
    for (std::uint32_t k = 0; k < specs[j].dictionary.size(); ++k) {
      dictionaries[j].emplace(specs[j].dictionary[k], k);
    }
  }
  std::unordered_map<std::string, ClassId> classes;
  for (ClassId c = 0; c < class_names.size(); ++c) classes.emplace(class_names[c], c);

  std::vector<ColumnValues> values(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    if (specs[j].kind == ColumnKind::kNumerical) {
      values[j] = std::vector<double>(n);
    } else {
      values[j] = std::vector<std::uint32_t>(n);
    }
  }
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows.cells[i];
    if (row.size() != specs.size()) {
      throw Error(Errc::kRaggedRow, "row " + std::to_string(i) + " has " +
                                        std::to_string(row.size()) + " cells, expected " +
                                        std::to_string(specs.size()));
    }
    for (std::size_t j = 0; j < specs.size(); ++j) {
      if (specs[j].kind == ColumnKind::kNumerical) {
        double v;
        if (!parse_real(row[j], &v)) {
          throw Error(Errc::kParseError, "row " + std::to_string(i) + " column '" +
                                             specs[j].name + "': '" + row[j] + "'");
        }
        std::get<std::vector<double>>(values[j])[i] = v;
      } else {
        auto it = dictionaries[j].find(row[j]);
        std::uint32_t id = kOutOfDictionary;
        if (it != dictionaries[j].end()) {
          id = it->second;
        } else if (mode == IngestMode::kStrict) {
          throw Error(Errc::kUnknownCategory, "'" + row[j] + "' in column '" +
                                                  specs[j].name + "'");
        }
        std::get<std::vector<std::uint32_t>>(values[j])[i] = id;
      }
    }
    auto it = classes.find(rows.labels[i]);
    if (it == classes.end()) {
      throw Error(Errc::kUnknownCategory, "label '" + rows.labels[i] + "'");
    }
    labels[i] = it->second;
  }
  return from_columns(std::move(specs), std::move(values), std::move(labels),
                      std::move(class_names), shards);
}

std::vector<ColumnSpec> infer_specs(const RawRows& rows) {
  const std::size_t m = rows.header.size();
  std::vector<ColumnSpec> specs(m);
  for (std::size_t j = 0; j < m; ++j) {
    specs[j].name = rows.header[j];
    specs[j].column_index = static_cast<std::uint32_t>(j);
    bool numerical = true;
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < rows.cells.size(); ++i) {
      if (rows.cells[i].size() != m) {
        throw Error(Errc::kRaggedRow, "row " + std::to_string(i));
      }
      double v;
      if (numerical && !parse_real(rows.cells[i][j], &v)) numerical = false;
      distinct.insert(rows.cells[i][j]);
    }
    if (!numerical) {
      specs[j].kind = ColumnKind::kCategorical;
      specs[j].dictionary.assign(distinct.begin(), distinct.end());
      check_arity(specs[j]);
    }
  }
  return specs;
}

std::vector<std::string> infer_class_names(const RawRows& rows) {
  std::set<std::string> distinct(rows.labels.begin(), rows.labels.end());
  return {distinct.begin(), distinct.end()};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cell.push_back('"');
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

}  // namespace

RawRows read_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::kParseError, "missing header in " + path.string());
  std::vector<std::string> header = split_csv_line(line);
  auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw Error(Errc::kInvalidArgument, "label column '" + label_column + "' not in header");
  }
  const std::size_t label_pos = label_it - header.begin();
  RawRows rows;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_pos) rows.header.push_back(header[j]);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::kRaggedRow, path.string() + ":" + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells");
    }
    rows.labels.push_back(cells[label_pos]);
    cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(label_pos));
    rows.cells.push_back(std::move(cells));
  }
  return rows;
}

void write_csv(const std::filesystem::path& path, const PreparedDataset& ds,
               const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIoFailure, "cannot write " + path.string());
  for (const auto& spec : ds.specs) out << spec.name << ',';
  out << label_column << '\n';
  const FeatureTable table(ds);
  char buf[64];
  for (SampleIndex i = 0; i < ds.n(); ++i) {
    for (FeatureIndex j = 0; j < ds.m(); ++j) {
      if (table.kind(j) == ColumnKind::kNumerical) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), table.numerical(i, j));
        out.write(buf, ptr - buf);
      } else {
        const std::uint32_t v = table.categorical(i, j);
        out << (v == kOutOfDictionary ? std::string("?") : ds.specs[j].dictionary[v]);
      }
      out << ',';
    }
    out << ds.class_names[ds.labels[i]] << '\n';
  }
  if (!out) throw Error(Errc::kIoFailure, "short write to " + path.string());
}

// ---------------------------------------------------------------------------
// External sort.

namespace {

constexpr std::size_t kEntryBytes = 20;

void encode_entry(const NumericalEntry& e, char* out) {
  ByteWriter w;
  w.f64(e.value);
  w.u32(e.label);
  w.u64(e.sample);
  std::memcpy(out, w.data().data(), kEntryBytes);
}

NumericalEntry decode_entry(const char* in) {
  ByteReader r(std::span(reinterpret_cast<const std::uint8_t*>(in), kEntryBytes));
  NumericalEntry e;
  e.value = r.f64();
  e.label = r.u32();
  e.sample = r.u64();
  return e;
}

class RunWriter {
 public:
  explicit RunWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(Errc::kIoFailure, "cannot create spill file " + path.string());
  }
  void put(const NumericalEntry& e) {
    char buf[kEntryBytes];
    encode_entry(e, buf);
    out_.write(buf, kEntryBytes);
    bytes_ += kEntryBytes;
  }
  std::size_t close() {
    out_.close();
    if (!out_) throw Error(Errc::kIoFailure, "write failed on " + path_.string());
    return bytes_;
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t bytes_ = 0;
};

class RunReader {
 public:
  explicit RunReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(Errc::kIoFailure, "cannot open spill file " + path.string());
  }
  bool next(NumericalEntry* e) {
    char buf[kEntryBytes];
    if (!in_.read(buf, kEntryBytes)) return false;
    *e = decode_entry(buf);
    return true;
  }

 private:
  std::ifstream in_;
};

template <typename Sink>
void merge_runs(const std::vector<std::filesystem::path>& runs, Sink&& sink) {
  std::vector<RunReader> readers;
  readers.reserve(runs.size());
  for (const auto& path : runs) readers.emplace_back(path);
  using Head = std::pair<NumericalEntry, std::size_t>;
  auto later = [](const Head& a, const Head& b) { return attribute_order(b.first, a.first); };
  std::priority_queue<Head, std::vector<Head>, decltype(later)> heap(later);
  for (std::size_t k = 0; k < readers.size(); ++k) {
    NumericalEntry e;
    if (readers[k].next(&e)) heap.push({e, k});
  }
  while (!heap.empty()) {
    auto [e, k] = heap.top();
    heap.pop();
    sink(e);
    NumericalEntry next;
    if (readers[k].next(&next)) heap.push({next, k});
  }
}

}  // namespace

std::vector<NumericalEntry> external_sort(std::vector<NumericalEntry> entries,
                                          std::size_t memory_budget,
                                          const std::filesystem::path& spill_dir,
                                          PresortStats* stats) {
  if (memory_budget < 3) throw Error(Errc::kInvalidArgument, "memory budget must be >= 3 entries");
  PresortStats local;
  if (entries.size() <= memory_budget) {
    std::sort(entries.begin(), entries.end(), attribute_order);
    local.initial_runs = entries.empty() ? 0 : 1;
    if (stats) *stats = local;
    return entries;
  }
  std::error_code ec;
  std::filesystem::create_directories(spill_dir, ec);
  if (ec) throw Error(Errc::kIoFailure, "cannot create " + spill_dir.string());
  std::size_t file_counter = 0;
  auto fresh_path = [&] {
    return spill_dir / ("run_" + std::to_string(file_counter++) + ".bin");
  };

  std::vector<std::filesystem::path> runs;
  for (std::size_t begin = 0; begin < entries.size(); begin += memory_budget) {
    const std::size_t end = std::min(entries.size(), begin + memory_budget);
    auto first = entries.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = entries.begin() + static_cast<std::ptrdiff_t>(end);
    std::sort(first, last, attribute_order);
    runs.push_back(fresh_path());
    RunWriter writer(runs.back());
    for (auto it = first; it != last; ++it) writer.put(*it);
    local.spilled_bytes += writer.close();
  }
  local.initial_runs = runs.size();
  const std::size_t total = entries.size();
  entries.clear();
  entries.shrink_to_fit();

  const std::size_t fan_in = memory_budget - 1;
  while (runs.size() > fan_in) {
    std::vector<std::filesystem::path> merged;
    for (std::size_t begin = 0; begin < runs.size(); begin += fan_in) {
      const std::size_t end = std::min(runs.size(), begin + fan_in);
      std::vector<std::filesystem::path> group(runs.begin() + static_cast<std::ptrdiff_t>(begin),
                                               runs.begin() + static_cast<std::ptrdiff_t>(end));
      merged.push_back(fresh_path());
      RunWriter writer(merged.back());
      merge_runs(group, [&](const NumericalEntry& e) { writer.put(e); });
      local.spilled_bytes += writer.close();
      for (const auto& path : group) std::filesystem::remove(path, ec);
    }
    runs = std::move(merged);
    ++local.merge_passes;
  }
  // Last pass merges straight into the in-memory attribute list.
  std::vector<NumericalEntry> out;
  out.reserve(total);
  merge_runs(runs, [&](const NumericalEntry& e) { out.push_back(e); });
  ++local.merge_passes;
  for (const auto& path : runs) std::filesystem::remove(path, ec);
  if (out.size() != total) throw Error(Errc::kIoFailure, "spill files lost entries");
  if (stats) *stats = local;
  return out;
}

PreparedDataset presort(PreparedDataset ds, std::size_t memory_budget, PresortStats* stats,
                        const std::filesystem::path& spill_dir) {
  if (memory_budget < 3) throw Error(Errc::kInvalidArgument, "memory budget must be >= 3 entries");
  std::filesystem::path dir = spill_dir;
  bool owns_dir = false;
  PresortStats total;
  for (std::size_t j = 0; j < ds.columns.size(); ++j) {
    auto* list = std::get_if<NumericalAttributeList>(&ds.columns[j]);
    if (list == nullptr) continue;
    if (list->entries.size() > memory_budget && dir.empty()) {
      std::random_device rd;
      dir = std::filesystem::temp_directory_path() /
            ("drf_spill_" + std::to_string(rd()) + "_" + std::to_string(rd()));
      owns_dir = true;
    }
    PresortStats column_stats;
    list->entries = external_sort(std::move(list->entries), memory_budget,
                                  dir / ("col_" + std::to_string(j)), &column_stats);
    list->sorted = true;
    total.merge_passes = std::max(total.merge_passes, column_stats.merge_passes);
    total.initial_runs = std::max(total.initial_runs, column_stats.initial_runs);
    total.spilled_bytes += column_stats.spilled_bytes;
  }
  if (owns_dir) {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  if (stats) *stats = total;
  return ds;
}

std::vector<double> numerical_values(const PreparedDataset& ds, FeatureIndex j) {
  std::vector<double> out(ds.n());
  for (const auto& e : ds.numerical(j).entries) out[e.sample] = e.value;
  return out;
}

std::vector<std::uint32_t> categorical_values(const PreparedDataset& ds, FeatureIndex j) {
  const auto& column = ds.categorical(j);
  std::vector<std::uint32_t> out(column.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = column.values[i].value;
  return out;
}

FeatureTable::FeatureTable(const PreparedDataset& ds)
    : n_(ds.n()), numeric_(ds.m()), category_(ds.m()) {
  kinds_.reserve(ds.m());
  for (FeatureIndex j = 0; j < ds.m(); ++j) {
    kinds_.push_back(ds.specs[j].kind);
    if (ds.specs[j].kind == ColumnKind::kNumerical) {
      numeric_[j] = numerical_values(ds, j);
    } else {
      category_[j] = categorical_values(ds, j);
    }
  }
}

void FeatureTable::permute_column(FeatureIndex j, const std::vector<SampleIndex>& from) {
  if (kinds_[j] == ColumnKind::kNumerical) {
    std::vector<double> out(numeric_[j].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = numeric_[j][from[i]];
    numeric_[j] = std::move(out);
  } else {
    std::vector<std::uint32_t> out(category_[j].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = category_[j][from[i]];
    category_[j] = std::move(out);
  }
}

// ---------------------------------------------------------------------------
// Column files.

namespace {

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoFailure, "short write to " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string column_file(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "col_%05zu.bin", j);
  return buf;
}

}  // namespace

void save_dataset(const PreparedDataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::kIoFailure, "cannot create " + dir.string());
  nlohmann::json manifest;
  manifest["format_version"] = kDatasetFormatVersion;
  manifest["n"] = ds.n();
  manifest["class_names"] = ds.class_names;
  manifest["shard_bounds"] = ds.shard_bounds;
  manifest["columns"] = nlohmann::json::array();
  for (std::size_t j = 0; j < ds.m(); ++j) {
    const ColumnSpec& spec = ds.specs[j];
    nlohmann::json c;
    c["name"] = spec.name;
    c["index"] = spec.column_index;
    c["file"] = column_file(j);
    if (spec.kind == ColumnKind::kNumerical) {
      c["kind"] = "numerical";
      c["sorted"] = ds.numerical(static_cast<FeatureIndex>(j)).sorted;
    } else {
      c["kind"] = "categorical";
      c["arity"] = spec.dictionary.size();
      c["dictionary"] = spec.dictionary;
    }
    manifest["columns"].push_back(std::move(c));

    ByteWriter w;
    if (spec.kind == ColumnKind::kNumerical) {
      for (const auto& e : ds.numerical(static_cast<FeatureIndex>(j)).entries) {
        w.f64(e.value);
        w.u32(e.label);
        w.u64(e.sample);
      }
    } else {
      for (const auto& e : ds.categorical(static_cast<FeatureIndex>(j)).values) {
        w.u32(e.value);
        w.u32(e.label);
      }
    }
    write_file(dir / column_file(j), w.data());
  }
  ByteWriter labels;
  for (ClassId y : ds.labels) labels.u32(y);
  write_file(dir / "labels.bin", labels.data());
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(Errc::kIoFailure, "cannot write manifest in " + dir.string());
}

PreparedDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(Errc::kIoFailure, "no manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, std::string("manifest: ") + e.what());
  }
  if (manifest.value("format_version", 0u) != kDatasetFormatVersion) {
    throw Error(Errc::kVersionMismatch, "dataset format version");
  }
  PreparedDataset ds;
  const std::size_t n = manifest.at("n").get<std::size_t>();
  ds.class_names = manifest.at("class_names").get<std::vector<std::string>>();
  ds.shard_bounds = manifest.at("shard_bounds").get<std::vector<SampleIndex>>();
  {
    const auto bytes = read_file(dir / "labels.bin");
    if (bytes.size() != 4 * n) throw Error(Errc::kParseError, "labels.bin size");
    ByteReader r(bytes);
    ds.labels.resize(n);
    for (auto& y : ds.labels) y = r.u32();
  }
  for (const auto& c : manifest.at("columns")) {
    ColumnSpec spec;
    spec.name = c.at("name").get<std::string>();
    spec.column_index = c.at("index").get<std::uint32_t>();
    const auto bytes = read_file(dir / c.at("file").get<std::string>());
    ByteReader r(bytes);
    if (c.at("kind").get<std::string>() == "numerical") {
      if (bytes.size() != kEntryBytes * n) throw Error(Errc::kParseError, spec.name + " size");
      NumericalAttributeList list;
      list.sorted = c.value("sorted", false);
      list.entries.resize(n);
      for (auto& e : list.entries) {
        e.value = r.f64();
        e.label = r.u32();
        e.sample = r.u64();
      }
      ds.columns.emplace_back(std::move(list));
    } else {
      spec.kind = ColumnKind::kCategorical;
      spec.dictionary = c.at("dictionary").get<std::vector<std::string>>();
      if (bytes.size() != 8 * n) throw Error(Errc::kParseError, spec.name + " size");
      CategoricalColumn column;
      column.values.resize(n);
      for (auto& e : column.values) {
        e.value = r.u32();
        e.label = r.u32();
      }
      column.shard_bounds = ds.shard_bounds;
      ds.columns.emplace_back(std::move(column));
    }
    ds.specs.push_back(std::move(spec));
  }
  return ds;
}

}  // namespace drf
