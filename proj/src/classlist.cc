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

#include "drf/classlist.h"

#include <algorithm>
#include <bit>
#include <unordered_map>
#include <unordered_set>

namespace drf {

unsigned entry_width(std::size_t active_leaves, bool has_closed) {
  const std::size_t codes = active_leaves + (has_closed ? 1 : 0);
  if (codes <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(codes - 1));
}

ClassList ClassList::init_root(std::size_t n, NodeId root, std::size_t chunk_entries) {
  ClassList cl;
  cl.n_ = n;
  cl.chunk_entries_ = chunk_entries;
  cl.leaf_ids_ = {root};
  cl.repack(0, {});
  return cl;
}

std::optional<NodeId> ClassList::leaf_of(SampleIndex i) const {
  if (i >= n_) {
    throw Error(Errc::kIndexOutOfRange,
                "sample " + std::to_string(i) + " >= n = " + std::to_string(n_));
  }
  const std::uint32_t s = slot(i);
  if (s == kClosedSlot) return std::nullopt;
  return leaf_ids_[s];
}

std::size_t ClassList::storage_bits() const {
  std::size_t words = 0;
  for (const auto& chunk : chunks_) words += chunk.size();
  return 64 * words;
}

void ClassList::repack(unsigned width, const std::vector<std::uint32_t>& codes) {
  width_ = width;
  const std::size_t per_chunk = chunk_entries_ == 0 ? n_ : chunk_entries_;
  const std::size_t num_chunks =
      chunk_entries_ == 0 ? 1 : (n_ + chunk_entries_ - 1) / chunk_entries_;
  chunks_.assign(num_chunks, {});
  for (std::size_t c = 0; c < num_chunks; ++c) {
    const std::size_t entries = std::min(per_chunk, n_ - c * per_chunk);
    chunks_[c].assign((entries * width + 63) / 64, 0);
  }
  if (width == 0) return;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const std::size_t chunk = chunk_entries_ == 0 ? 0 : i / chunk_entries_;
    const std::size_t local = chunk_entries_ == 0 ? i : i % chunk_entries_;
    std::uint64_t* words = chunks_[chunk].data();
    const std::size_t bit = local * width;
    const std::size_t w = bit >> 6;
    const unsigned off = bit & 63;
    words[w] |= std::uint64_t{codes[i]} << off;
    if (off + width > 64) words[w + 1] |= std::uint64_t{codes[i]} >> (64 - off);
  }
}

void ClassList::apply_depth_update(const DepthUpdate& update,
                                   std::span<const std::uint8_t> bags,
                                   const ConditionBitmap& bitmap) {
  if (bags.size() != n_) throw Error(Errc::kInvalidArgument, "bag column length");
  enum class Fate : std::uint8_t { kKeep, kClose, kSplit };
  const std::size_t slots = leaf_ids_.size();
  std::unordered_map<NodeId, std::uint32_t> slot_of;
  for (std::uint32_t s = 0; s < slots; ++s) slot_of.emplace(leaf_ids_[s], s);
  std::unordered_set<NodeId> closed(update.closures.begin(), update.closures.end());

  std::vector<Fate> fate(slots, Fate::kKeep);
  std::vector<NodeId> pos_child(slots), neg_child(slots);
  std::vector<NodeId> children;
  for (const auto& split : update.splits) {
    auto it = slot_of.find(split.leaf);
    if (it == slot_of.end()) {
      throw Error(Errc::kInvalidArgument,
                  "split of leaf " + std::to_string(split.leaf) + " which is not active");
    }
    fate[it->second] = Fate::kSplit;
    pos_child[it->second] = split.positive_child;
    neg_child[it->second] = split.negative_child;
    if (!closed.contains(split.positive_child)) children.push_back(split.positive_child);
    if (!closed.contains(split.negative_child)) children.push_back(split.negative_child);
  }
  for (std::uint32_t s = 0; s < slots; ++s) {
    if (fate[s] == Fate::kKeep && closed.contains(leaf_ids_[s])) fate[s] = Fate::kClose;
  }

  // New active leaves: surviving old leaves, then new children by creation id.
  std::sort(children.begin(), children.end());
  std::vector<NodeId> next_ids;
  for (std::uint32_t s = 0; s < slots; ++s) {
    if (fate[s] == Fate::kKeep) next_ids.push_back(leaf_ids_[s]);
  }
  next_ids.insert(next_ids.end(), children.begin(), children.end());
  std::unordered_map<NodeId, std::uint32_t> next_slot;
  for (std::uint32_t s = 0; s < next_ids.size(); ++s) next_slot.emplace(next_ids[s], s);

  // Target slot per sample, kClosedSlot for closed. Computed in a first pass so
  // the new width is known before repacking.
  std::vector<std::uint32_t> targets(n_);
  std::size_t bit = 0;
  bool any_closed = false;
  for (SampleIndex i = 0; i < n_; ++i) {
    const std::uint32_t s = slot(i);
    std::uint32_t target = kClosedSlot;
    if (s != kClosedSlot) {
      switch (fate[s]) {
        case Fate::kKeep:
          target = next_slot.at(leaf_ids_[s]);
          break;
        case Fate::kClose:
          break;
        case Fate::kSplit:
          if (bags[i] > 0) {
            if (bit >= bitmap.size()) {
              throw Error(Errc::kBitmapLengthMismatch,
                          "bitmap has " + std::to_string(bitmap.size()) + " bits, more needed");
            }
            const NodeId child = bitmap.get(bit++) ? pos_child[s] : neg_child[s];
            auto it = next_slot.find(child);
            if (it != next_slot.end()) target = it->second;
          }
          break;
      }
    }
    if (target == kClosedSlot) any_closed = true;
    targets[i] = target;
  }
  if (bit != bitmap.size()) {
    throw Error(Errc::kBitmapLengthMismatch, "bitmap has " + std::to_string(bitmap.size()) +
                                                 " bits, expected " + std::to_string(bit));
  }
  has_closed_ = any_closed;
  leaf_ids_ = std::move(next_ids);
  for (auto& t : targets) t = (t == kClosedSlot) ? 0 : t + (has_closed_ ? 1 : 0);
  repack(entry_width(leaf_ids_.size(), has_closed_), targets);
}

void ClassList::dump(std::ostream& out) const {
  for (SampleIndex i = 0; i < n_; ++i) {
    const auto leaf = leaf_of(i);
    out << i << ": ";
    if (leaf) {
      out << *leaf;
    } else {
      out << "closed";
    }
    out << '\n';
  }
}

}  // namespace drf
