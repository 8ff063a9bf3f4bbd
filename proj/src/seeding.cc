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

#include "drf/seeding.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drf {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t SplitMixRng::below(std::uint64_t range) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t r;
  do {
    r = next();
  } while (r >= limit);
  return r % range;
}

SeedContext SeedContext::make(std::uint64_t forest_seed) {
  SeedContext ctx;
  ctx.forest_seed = forest_seed;
  double term = std::exp(-1.0);
  double sum = 0.0;
  for (std::uint32_t k = 0; k <= kBagMax; ++k) {
    if (k > 0) term /= static_cast<double>(k);
    sum += term;
    ctx.cdf[k] = sum;
  }
  return ctx;
}

namespace {

constexpr std::uint64_t kMersenne61 = (1ull << 61) - 1;

std::uint64_t mod_mersenne61(unsigned __int128 x) {
  std::uint64_t r = static_cast<std::uint64_t>(x & kMersenne61) +
                    static_cast<std::uint64_t>(x >> 61);
  r = (r & kMersenne61) + (r >> 61);
  return r >= kMersenne61 ? r - kMersenne61 : r;
}

std::uint64_t lcg_steps(std::uint64_t c, const SeedContext& ctx) {
  // steps + 1 iterations.
  const bool mersenne = ctx.modulus == kMersenne61 && ctx.a < kMersenne61 && ctx.b < kMersenne61;
  for (std::uint32_t k = 0; k <= ctx.steps; ++k) {
    const unsigned __int128 x = static_cast<unsigned __int128>(ctx.a) * c + ctx.b;
    c = mersenne ? mod_mersenne61(x) : static_cast<std::uint64_t>(x % ctx.modulus);
  }
  return c;
}

}  // namespace

std::uint32_t bag(SampleIndex i, TreeIndex p, const SeedContext& ctx) {
  // The seed and the tree key are mixed in with XOR rather than addition: a
  // purely additive schedule makes every tree's bag a rotation of the same
  // equidistributed sequence.
  const std::uint64_t seed_key = splitmix64(ctx.forest_seed) % ctx.modulus;
  const std::uint64_t tree_key = splitmix64(ctx.forest_seed ^ (std::uint64_t{p} + 1)) % ctx.modulus;
  std::uint64_t c = (i ^ seed_key) % ctx.modulus;
  c = lcg_steps(c, ctx);
  c = (c ^ tree_key) % ctx.modulus;
  c = lcg_steps(c, ctx);
  const double v = static_cast<double>(c) / static_cast<double>(ctx.modulus);
  for (std::uint32_t k = 0; k <= kBagMax; ++k) {
    if (v <= ctx.cdf[k]) return k;
  }
  return kBagMax + 1;
}

std::vector<std::uint8_t> bag_column(std::size_t n, TreeIndex p, const SeedContext& ctx) {
  std::vector<std::uint8_t> out(n);
  for (SampleIndex i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(bag(i, p, ctx));
  return out;
}

std::uint32_t default_m_prime(std::uint32_t m) {
  if (m <= 1) return 1;
  auto r = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(m)));
  while (r * r < m) ++r;
  while (r > 1 && (r - 1) * (r - 1) >= m) --r;
  return r;
}

std::uint64_t child_key(std::uint64_t parent_key, bool positive_branch) {
  return splitmix64(parent_key * 2 + (positive_branch ? 1 : 0));
}

std::vector<FeatureIndex> candidate_features(std::uint64_t node_key, std::uint32_t depth,
                                             TreeIndex p, const CandidatePlan& plan,
                                             std::uint32_t m, const SeedContext& ctx) {
  if (m == 0) throw Error(Errc::kInvalidArgument, "candidate_features needs m >= 1");
  const std::uint32_t want = std::min(plan.m_prime == 0 ? default_m_prime(m) : plan.m_prime, m);
  std::vector<FeatureIndex> features(m);
  std::iota(features.begin(), features.end(), 0);
  if (want == m) return features;

  const std::uint64_t where = plan.usb ? splitmix64(0xD1B54A32D192ED03ull ^ depth) : node_key;
  std::uint64_t state = splitmix64(splitmix64(ctx.forest_seed ^ 0xA0761D6478BD642Full) ^
                                   splitmix64(std::uint64_t{p} + 0x8EBC6AF09C88C6E3ull) ^ where);
  // Partial Fisher-Yates over a counter-based splitmix64 stream.
  for (std::uint32_t k = 0; k < want; ++k) {
    const std::uint64_t range = m - k;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t r;
    do {
      state += 0x9E3779B97F4A7C15ull;
      r = splitmix64(state);
    } while (r >= limit);
    std::swap(features[k], features[k + r % range]);
  }
  features.resize(want);
  std::sort(features.begin(), features.end());
  return features;
}

}  // namespace drf
