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

#ifndef DRF_SEEDING_H_
#define DRF_SEEDING_H_

#include <array>
#include <utility>
#include <cstdint>
#include <vector>

#include "drf/common.h"

namespace drf {

// Bag multiplicities are drawn in [0, kBagMax + 1].
inline constexpr std::uint32_t kBagMax = 10;

// Shared pseudo-random context. Every worker builds the same context from the
// run manifest, so bagging and feature sampling never cross the network.
struct SeedContext {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t forest_seed = 0;
  // Three fixed primes; the modulus is the Mersenne prime 2^61 - 1.
  std::uint64_t a = 1752450205419405077ull;
  std::uint64_t b = 1442695040888963399ull;
  std::uint64_t modulus = (1ull << 61) - 1;
  std::uint32_t steps = 3;
  // cdf[k] = P(X <= k) for X ~ Poisson(1).
  std::array<double, kBagMax + 1> cdf{};

  static SeedContext make(std::uint64_t forest_seed);

  bool operator==(const SeedContext&) const = default;
};

// Number of times sample i is drawn in the bag of tree p. O(1) and stateless.
std::uint32_t bag(SampleIndex i, TreeIndex p, const SeedContext& ctx);

// bag() for samples 0..n-1, as the one-byte-per-sample cache held by workers.
std::vector<std::uint8_t> bag_column(std::size_t n, TreeIndex p, const SeedContext& ctx);

struct CandidatePlan {
  // Unique set of bagged features per depth: all nodes of one depth share a draw.
  bool usb = false;
  std::uint32_t m_prime = 0;
};

// ceil(sqrt(m)) with a floor of 1.
std::uint32_t default_m_prime(std::uint32_t m);

// Path key identifying a node independently of the order nodes are built in.
inline constexpr std::uint64_t kRootKey = 0x6a09e667f3bcc908ull;
std::uint64_t child_key(std::uint64_t parent_key, bool positive_branch);

// Sorted set of min(m_prime, m) distinct features considered at the node
// identified by `node_key` (or at `depth` under USB) of tree p.
std::vector<FeatureIndex> candidate_features(std::uint64_t node_key, std::uint32_t depth,
                                             TreeIndex p, const CandidatePlan& plan,
                                             std::uint32_t m, const SeedContext& ctx);

std::uint64_t splitmix64(std::uint64_t x);

// Sequential splitmix64 stream with portable bounded draws, for everything
// that needs reproducible randomness outside bagging (placement, synthetic
// data, permutations).
class SplitMixRng {
 public:
  explicit SplitMixRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix64(state_);
  }
  // Uniform in [0, range), range >= 1.
  std::uint64_t below(std::uint64_t range);
  // Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[below(k)]);
  }

 private:
  std::uint64_t state_;
};

}  // namespace drf

#endif  // DRF_SEEDING_H_
