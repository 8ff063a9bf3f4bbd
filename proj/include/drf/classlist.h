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

#ifndef DRF_CLASSLIST_H_
#define DRF_CLASSLIST_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "drf/bitmap.h"
#include "drf/common.h"

namespace drf {

// One split applied at the end of a depth: samples of `leaf` move to one of
// its children according to their condition bit.
struct LeafSplit {
  NodeId leaf;
  NodeId positive_child;
  NodeId negative_child;
  bool operator==(const LeafSplit&) const = default;
};

// Everything needed to move a class list from depth i to depth i + 1. Open
// leaves absent from `splits` are closed; `closures` may also name children
// that are closed as soon as they are created.
struct DepthUpdate {
  std::vector<LeafSplit> splits;
  std::vector<NodeId> closures;
  bool operator==(const DepthUpdate&) const = default;
};

// Bits per entry: ceil(log2(l + 1)) when a closed leaf exists, ceil(log2(l))
// otherwise.
unsigned entry_width(std::size_t active_leaves, bool has_closed);

// Per-sample current-leaf mapping packed at entry_width bits per sample.
// With a closed leaf present, code 0 means "closed" and active leaves use codes
// 1..l in creation order; otherwise active leaves use codes 0..l-1.
class ClassList {
 public:
  // Chunked mode keeps the packed words in fixed-size pages of
  // `chunk_entries` samples instead of one contiguous block.
  static ClassList init_root(std::size_t n, NodeId root = 0, std::size_t chunk_entries = 0);

  std::size_t n() const { return n_; }
  unsigned width() const { return width_; }
  bool has_closed() const { return has_closed_; }
  std::size_t active_leaves() const { return leaf_ids_.size(); }
  // Active leaves in slot order (the creation order).
  const std::vector<NodeId>& leaf_ids() const { return leaf_ids_; }

  // Checked lookup; nullopt means the sample is in a closed leaf.
  std::optional<NodeId> leaf_of(SampleIndex i) const;

  // Unchecked hot-path lookup: slot in leaf_ids(), or kClosedSlot.
  static constexpr std::uint32_t kClosedSlot = 0xFFFFFFFFu;
  std::uint32_t slot(SampleIndex i) const {
    const std::uint32_t code = raw_code(i);
    if (has_closed_) return code == 0 ? kClosedSlot : code - 1;
    return code;
  }

  // `bags[i]` is the bag multiplicity of sample i. The bitmap holds one bit
  // per bagged sample of a split leaf, ascending sample index.
  void apply_depth_update(const DepthUpdate& update, std::span<const std::uint8_t> bags,
                          const ConditionBitmap& bitmap);

  // Bits currently allocated for codes, at 64-bit word granularity.
  std::size_t storage_bits() const;
  std::size_t chunk_entries() const { return chunk_entries_; }

  void dump(std::ostream& out) const;

 private:
  std::uint32_t raw_code(SampleIndex i) const {
    if (width_ == 0) return 0;
    const std::size_t chunk = chunk_entries_ == 0 ? 0 : i / chunk_entries_;
    const std::size_t local = chunk_entries_ == 0 ? i : i % chunk_entries_;
    const std::uint64_t* words = chunks_[chunk].data();
    const std::size_t bit = local * width_;
    const std::size_t w = bit >> 6;
    const unsigned off = bit & 63;
    std::uint64_t v = words[w] >> off;
    if (off + width_ > 64) v |= words[w + 1] << (64 - off);
    return static_cast<std::uint32_t>(v & ((std::uint64_t{1} << width_) - 1));
  }

  void repack(unsigned width, const std::vector<std::uint32_t>& codes);

  std::size_t n_ = 0;
  unsigned width_ = 0;
  bool has_closed_ = false;
  std::size_t chunk_entries_ = 0;
  std::vector<NodeId> leaf_ids_;
  std::vector<std::vector<std::uint64_t>> chunks_;
};

}  // namespace drf

#endif  // DRF_CLASSLIST_H_
