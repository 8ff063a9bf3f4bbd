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

#ifndef DRF_BITMAP_H_
#define DRF_BITMAP_H_

#include <cstdint>
#include <span>
#include <vector>

#include "drf/bytes.h"

namespace drf {

// Dense condition bitmap. Bit k refers to the k-th sample in canonical order
// (ascending sample index over bagged samples of the evaluated leaves); 1 means
// the condition holds and the sample goes to the positive child.
//
// Wire layout: u64 bit count, then ceil(count / 8) bytes, bit k stored in
// byte k / 8 at position k % 8 (LSB first).
class ConditionBitmap {
 public:
  static constexpr std::size_t kHeaderBits = 64;

  ConditionBitmap() = default;
  explicit ConditionBitmap(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t k) const { return (words_[k >> 6] >> (k & 63)) & 1; }
  void set(std::size_t k, bool bit) {
    const std::uint64_t mask = std::uint64_t{1} << (k & 63);
    if (bit) {
      words_[k >> 6] |= mask;
    } else {
      words_[k >> 6] &= ~mask;
    }
  }
  void push_back(bool bit) {
    if ((size_ & 63) == 0) words_.push_back(0);
    ++size_;
    set(size_ - 1, bit);
  }

  // Payload bits on the wire, header included.
  std::size_t wire_bits() const { return kHeaderBits + 8 * ((size_ + 7) / 8); }

  void encode(ByteWriter& w) const {
    w.u64(size_);
    const std::size_t bytes = (size_ + 7) / 8;
    for (std::size_t b = 0; b < bytes; ++b) {
      w.u8(static_cast<std::uint8_t>(words_[b / 8] >> (8 * (b % 8))));
    }
  }
  static ConditionBitmap decode(ByteReader& r) {
    const std::uint64_t size = r.u64();
    auto bytes = r.bytes((size + 7) / 8);
    ConditionBitmap out(size);
    for (std::size_t b = 0; b < bytes.size(); ++b) {
      out.words_[b / 8] |= std::uint64_t{bytes[b]} << (8 * (b % 8));
    }
    // Padding bits past `size` are ignored.
    if (size & 63) out.words_.back() &= (std::uint64_t{1} << (size & 63)) - 1;
    return out;
  }

  bool operator==(const ConditionBitmap&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace drf

#endif  // DRF_BITMAP_H_
