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

#include "drf/codec.h"

namespace drf {

void encode(ByteWriter& w, const LabelHistogram& h) {
  w.u32(static_cast<std::uint32_t>(h.counts.size()));
  for (auto c : h.counts) w.u64(c);
}

LabelHistogram decode_histogram(ByteReader& r) {
  LabelHistogram h(r.u32());
  for (auto& c : h.counts) {
    c = r.u64();
    h.total += c;
  }
  return h;
}

void encode(ByteWriter& w, const Condition& c) {
  if (const auto* n = std::get_if<NumericalCondition>(&c)) {
    w.u8(0);
    w.f64(n->threshold);
  } else {
    w.u8(1);
    encode(w, std::get<CategoricalCondition>(c).subset);
  }
}

Condition decode_condition(ByteReader& r) {
  const std::uint8_t kind = r.u8();
  if (kind == 0) return NumericalCondition{r.f64()};
  if (kind == 1) return CategoricalCondition{decode_u32_vector(r)};
  throw Error(Errc::kParseError, "unknown condition kind " + std::to_string(kind));
}

void encode(ByteWriter& w, const SplitCandidate& c) {
  w.u32(c.leaf);
  w.u32(c.feature);
  encode(w, c.condition);
  w.f64(c.score);
  encode(w, c.positive);
  encode(w, c.negative);
}

SplitCandidate decode_candidate(ByteReader& r) {
  SplitCandidate c;
  c.leaf = r.u32();
  c.feature = r.u32();
  c.condition = decode_condition(r);
  c.score = r.f64();
  c.positive = decode_histogram(r);
  c.negative = decode_histogram(r);
  return c;
}

void encode(ByteWriter& w, const SuperSplit& s) {
  w.u64(s.size());
  for (const auto& [leaf, c] : s) encode(w, c);
}

SuperSplit decode_supersplit(ByteReader& r) {
  SuperSplit s;
  const std::uint64_t count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    SplitCandidate c = decode_candidate(r);
    const NodeId leaf = c.leaf;
    s.emplace(leaf, std::move(c));
  }
  return s;
}

void encode(ByteWriter& w, const std::vector<OpenLeaf>& leaves) {
  w.u64(leaves.size());
  for (const auto& leaf : leaves) {
    w.u32(leaf.id);
    w.u64(leaf.key);
    encode(w, leaf.histogram);
  }
}

std::vector<OpenLeaf> decode_open_leaves(ByteReader& r) {
  std::vector<OpenLeaf> leaves(r.u64());
  for (auto& leaf : leaves) {
    leaf.id = r.u32();
    leaf.key = r.u64();
    leaf.histogram = decode_histogram(r);
  }
  return leaves;
}

void encode(ByteWriter& w, const DepthUpdate& u) {
  w.u64(u.splits.size());
  for (const auto& s : u.splits) {
    w.u32(s.leaf);
    w.u32(s.positive_child);
    w.u32(s.negative_child);
  }
  encode(w, u.closures);
}

DepthUpdate decode_depth_update(ByteReader& r) {
  DepthUpdate u;
  u.splits.resize(r.u64());
  for (auto& s : u.splits) {
    s.leaf = r.u32();
    s.positive_child = r.u32();
    s.negative_child = r.u32();
  }
  u.closures = decode_u32_vector(r);
  return u;
}

void encode(ByteWriter& w, const std::vector<std::uint32_t>& v) {
  w.u64(v.size());
  for (auto x : v) w.u32(x);
}

std::vector<std::uint32_t> decode_u32_vector(ByteReader& r) {
  const std::uint64_t size = r.u64();
  if (size > r.remaining() / 4) throw Error(Errc::kParseError, "vector length");
  std::vector<std::uint32_t> v(size);
  for (auto& x : v) x = r.u32();
  return v;
}

}  // namespace drf
