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

#include "drf/tree.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drf/codec.h"

namespace drf {

std::string_view leaf_reason_name(LeafReason r) {
  switch (r) {
    case LeafReason::kInternal: return "internal";
    case LeafReason::kPure: return "pure";
    case LeafReason::kTooSmall: return "too_small";
    case LeafReason::kNoGain: return "no_gain";
    case LeafReason::kMaxDepth: return "max_depth";
  }
  return "unknown";
}

std::uint32_t DecisionTree::depth() const {
  std::uint32_t d = 0;
  for (const auto& node : nodes) {
    if (node.is_leaf()) d = std::max(d, node.depth);
  }
  return d;
}

std::size_t DecisionTree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

const TreeNode& DecisionTree::route(const FeatureTable& rows, SampleIndex i) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    bool holds;
    if (const auto* c = std::get_if<NumericalCondition>(&node->condition)) {
      holds = numerical_holds(*c, rows.numerical(i, node->feature));
    } else {
      holds = categorical_holds(std::get<CategoricalCondition>(node->condition),
                                rows.categorical(i, node->feature));
    }
    node = &nodes[holds ? node->positive : node->negative];
  }
  return *node;
}

double DecisionTree::probability(const FeatureTable& rows, SampleIndex i,
                                 ClassId positive_class) const {
  const LabelHistogram& h = route(rows, i).distribution;
  if (h.total == 0) return 0.0;
  return static_cast<double>(h.counts[positive_class]) / static_cast<double>(h.total);
}

namespace {

constexpr std::uint32_t kTreeMagic = 0x54524644;    // "DFRT" little-endian bytes.
constexpr std::uint32_t kForestMagic = 0x46524644;  // "DFRF".

void encode_node(ByteWriter& w, const TreeNode& n) {
  w.u32(n.id);
  w.u32(n.depth);
  w.u32(n.parent);
  encode(w, n.distribution);
  w.u8(static_cast<std::uint8_t>(n.reason));
  if (!n.is_leaf()) {
    w.u32(n.feature);
    encode(w, n.condition);
    w.f64(n.score);
    w.u32(n.positive);
    w.u32(n.negative);
  }
}

TreeNode decode_node(ByteReader& r) {
  TreeNode n;
  n.id = r.u32();
  n.depth = r.u32();
  n.parent = r.u32();
  n.distribution = decode_histogram(r);
  const std::uint8_t reason = r.u8();
  if (reason > static_cast<std::uint8_t>(LeafReason::kMaxDepth)) {
    throw Error(Errc::kParseError, "bad leaf reason");
  }
  n.reason = static_cast<LeafReason>(reason);
  if (!n.is_leaf()) {
    n.feature = r.u32();
    n.condition = decode_condition(r);
    n.score = r.f64();
    n.positive = r.u32();
    n.negative = r.u32();
  }
  return n;
}

}  // namespace

void encode_tree(const DecisionTree& tree, ByteWriter& w, bool timings) {
  w.u32(kTreeMagic);
  w.u32(kTreeFormatVersion);
  w.u32(tree.index);
  w.u64(tree.nodes.size());
  for (const auto& n : tree.nodes) encode_node(w, n);
  w.u64(tree.depth_stats.size());
  w.u8(timings ? 1 : 0);
  for (const auto& s : tree.depth_stats) {
    w.u32(s.depth);
    w.u32(s.open_leaves);
    w.f64(s.open_fraction);
    w.f64(s.mean_closed_depth);
    w.u32(s.max_worker_features);
    w.u32(s.drawn_features);
    w.u64(s.bagged_open_samples);
    w.u8(s.pruning ? 1 : 0);
    if (timings) w.f64(s.seconds);
  }
}

DecisionTree decode_tree(ByteReader& r) {
  if (r.u32() != kTreeMagic) throw Error(Errc::kParseError, "not a tree record");
  const std::uint32_t version = r.u32();
  if (version != kTreeFormatVersion) {
    throw Error(Errc::kVersionMismatch, "tree format version " + std::to_string(version));
  }
  DecisionTree tree;
  tree.index = r.u32();
  const std::uint64_t count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    tree.nodes.push_back(decode_node(r));
    if (tree.nodes.back().id != k) throw Error(Errc::kParseError, "node ids out of order");
  }
  const std::uint64_t depths = r.u64();
  const bool timings = r.u8() != 0;
  for (std::uint64_t k = 0; k < depths; ++k) {
    DepthStats s;
    s.depth = r.u32();
    s.open_leaves = r.u32();
    s.open_fraction = r.f64();
    s.mean_closed_depth = r.f64();
    s.max_worker_features = r.u32();
    s.drawn_features = r.u32();
    s.bagged_open_samples = r.u64();
    s.pruning = r.u8() != 0;
    if (timings) s.seconds = r.f64();
    tree.depth_stats.push_back(s);
  }
  return tree;
}

std::vector<std::uint8_t> serialize_forest(const Forest& forest) {
  ByteWriter w;
  w.u32(kForestMagic);
  w.u32(kTreeFormatVersion);
  w.u32(forest.num_classes);
  w.u32(static_cast<std::uint32_t>(forest.kinds.size()));
  for (auto k : forest.kinds) w.u8(static_cast<std::uint8_t>(k));
  w.u64(forest.trees.size());
  for (const auto& t : forest.trees) encode_tree(t, w);
  return w.release();
}

Forest deserialize_forest(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u32() != kForestMagic) throw Error(Errc::kParseError, "not a forest file");
  const std::uint32_t version = r.u32();
  if (version != kTreeFormatVersion) {
    throw Error(Errc::kVersionMismatch, "forest format version " + std::to_string(version));
  }
  Forest f;
  f.num_classes = r.u32();
  f.kinds.resize(r.u32());
  for (auto& k : f.kinds) k = static_cast<ColumnKind>(r.u8());
  const std::uint64_t trees = r.u64();
  for (std::uint64_t p = 0; p < trees; ++p) f.trees.push_back(decode_tree(r));
  if (!r.done()) throw Error(Errc::kParseError, "trailing bytes after forest");
  return f;
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  const auto bytes = serialize_forest(forest);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoFailure, "write failed for " + path.string());
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_forest(bytes);
}

void dump_tree(const DecisionTree& tree, std::ostream& out) {
  char buf[64];
  for (const auto& n : tree.nodes) {
    out << n.id << " d=" << n.depth;
    if (n.is_leaf()) {
      out << " leaf(" << leaf_reason_name(n.reason) << ") [";
      for (std::size_t k = 0; k < n.distribution.counts.size(); ++k) {
        out << (k ? "," : "") << n.distribution.counts[k];
      }
      out << "]";
    } else {
      out << " f" << n.feature;
      if (const auto* c = std::get_if<NumericalCondition>(&n.condition)) {
        std::snprintf(buf, sizeof(buf), "%a", c->threshold);
        out << " <= " << buf;
      } else {
        out << " in {";
        const auto& subset = std::get<CategoricalCondition>(n.condition).subset;
        for (std::size_t k = 0; k < subset.size(); ++k) out << (k ? "," : "") << subset[k];
        out << "}";
      }
      std::snprintf(buf, sizeof(buf), "%a", n.score);
      out << " score=" << buf << " -> " << n.positive << "," << n.negative;
    }
    out << "\n";
  }
}

std::string dump_tree(const DecisionTree& tree) {
  std::ostringstream out;
  dump_tree(tree, out);
  return out.str();
}

}  // namespace drf
