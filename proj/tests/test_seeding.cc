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

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "drf/seeding.h"

using namespace drf;

namespace {

// Independent transcription of the bagging recurrence: plain 128-bit modulo
// instead of the Mersenne reduction, inverse-CDF by explicit Poisson terms.
std::uint32_t bag_oracle(std::uint64_t i, std::uint32_t p, std::uint64_t seed) {
  const unsigned __int128 M = (static_cast<unsigned __int128>(1) << 61) - 1;
  const unsigned __int128 a = 1752450205419405077ull;
  const unsigned __int128 b = 1442695040888963399ull;
  auto steps = [&](unsigned __int128 c) {
    for (int k = 0; k < 4; ++k) c = (a * c + b) % M;
    return c;
  };
  const unsigned __int128 seed_key = splitmix64(seed) % M;
  const unsigned __int128 tree_key = splitmix64(seed ^ (std::uint64_t{p} + 1)) % M;
  unsigned __int128 c = (static_cast<unsigned __int128>(i) ^ seed_key) % M;
  c = steps(c);
  c = (c ^ tree_key) % M;
  c = steps(c);
  const double v = static_cast<double>(static_cast<std::uint64_t>(c)) /
                   static_cast<double>(static_cast<std::uint64_t>(M));
  double cdf = 0.0;
  double term = std::exp(-1.0);
  for (std::uint32_t k = 0; k <= 10; ++k) {
    if (k > 0) term /= k;
    cdf += term;
    if (v <= cdf) return k;
  }
  return 11;
}

}  // namespace

TEST_CASE("bag is deterministic") {
  const auto ctx = SeedContext::make(17);
  CHECK(bag(42, 7, ctx) == bag(42, 7, ctx));
  CHECK(SeedContext::make(17) == ctx);
}

TEST_CASE("bag matches the transcribed recurrence") {
  for (std::uint64_t seed : {1ull, 2ull, 0xFFFFFFFFFFFFull}) {
    const auto ctx = SeedContext::make(seed);
    for (std::uint64_t i = 0; i < 3000; i += 7) {
      for (std::uint32_t p : {0u, 1u, 9u, 1000u}) {
        CHECK(bag(i, p, ctx) == bag_oracle(i, p, seed));
      }
    }
  }
  // Indices above the modulus fold back into the field.
  const auto ctx = SeedContext::make(1);
  CHECK(bag(1ull << 62, 3, ctx) == bag_oracle(1ull << 62, 3, 1));
}

TEST_CASE("frozen bag values") {
  // Produced by bag_oracle for seed 1, tree 0.
  const std::vector<std::uint32_t> frozen{2, 2, 0, 0, 1, 0, 0, 0, 2, 1, 2, 1, 1, 0, 1, 1};
  const auto ctx = SeedContext::make(1);
  for (std::uint64_t i = 0; i < frozen.size(); ++i) {
    CHECK(bag_oracle(i, 0, 1) == frozen[i]);
    CHECK(bag(i, 0, ctx) == frozen[i]);
  }
}

TEST_CASE("bag statistics over 1e6 samples") {
  const auto ctx = SeedContext::make(1);
  std::map<std::uint32_t, std::uint64_t> hist;
  double sum = 0.0;
  const std::uint64_t n = 1000000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto k = bag(i, 0, ctx);
    ++hist[k];
    sum += k;
  }
  CHECK(std::abs(sum / n - 1.0) < 0.01);
  CHECK(std::abs(static_cast<double>(hist[0]) / n - std::exp(-1.0)) < 0.005);
  CHECK(std::abs(static_cast<double>(hist[1]) / n - std::exp(-1.0)) < 0.005);
  CHECK(std::abs(static_cast<double>(hist[2]) / n - std::exp(-1.0) / 2) < 0.005);
  CHECK(hist.rbegin()->first <= kBagMax + 1);
}

TEST_CASE("bags of different trees are uncorrelated") {
  const auto ctx = SeedContext::make(5);
  const std::uint64_t n = 200000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = bag(i, 0, ctx);
    const double y = bag(i, 1, ctx);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double r = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  CHECK(std::abs(r) < 0.01);
}

TEST_CASE("bag_column agrees with bag") {
  const auto ctx = SeedContext::make(3);
  const auto col = bag_column(500, 4, ctx);
  for (SampleIndex i = 0; i < 500; ++i) CHECK(col[i] == bag(i, 4, ctx));
}

TEST_CASE("default m_prime is ceil(sqrt(m))") {
  CHECK(default_m_prime(1) == 1);
  CHECK(default_m_prime(2) == 2);
  CHECK(default_m_prime(4) == 2);
  CHECK(default_m_prime(5) == 3);
  CHECK(default_m_prime(16) == 4);
  CHECK(default_m_prime(17) == 5);
  CHECK(default_m_prime(100) == 10);
}

TEST_CASE("candidate features") {
  const auto ctx = SeedContext::make(2);
  CandidatePlan plan{false, 4};
  const auto f = candidate_features(kRootKey, 0, 0, plan, 16, ctx);
  CHECK(f.size() == 4);
  CHECK(std::set<FeatureIndex>(f.begin(), f.end()).size() == 4);
  CHECK(std::is_sorted(f.begin(), f.end()));
  for (auto j : f) CHECK(j < 16);
  CHECK(candidate_features(kRootKey, 0, 0, plan, 16, ctx) == f);

  SUBCASE("usb shares one set per depth") {
    CandidatePlan usb{true, 4};
    const auto h1 = child_key(child_key(child_key(kRootKey, true), false), true);
    const auto h2 = child_key(child_key(child_key(kRootKey, false), false), false);
    CHECK(candidate_features(h1, 3, 0, usb, 16, ctx) == candidate_features(h2, 3, 0, usb, 16, ctx));
  }
  SUBCASE("m_prime >= m selects every feature") {
    CHECK(candidate_features(kRootKey, 0, 0, CandidatePlan{false, 9}, 5, ctx) ==
          std::vector<FeatureIndex>{0, 1, 2, 3, 4});
  }
}

TEST_CASE("candidate selection frequencies are uniform") {
  const auto ctx = SeedContext::make(8);
  const std::uint32_t m = 16, mp = 4, nodes = 10000;
  std::vector<double> counts(m, 0);
  std::uint64_t key = kRootKey;
  for (std::uint32_t k = 0; k < nodes; ++k) {
    key = child_key(key, k % 2 == 0);
    for (auto j : candidate_features(key, 0, k % 3, CandidatePlan{false, mp}, m, ctx)) ++counts[j];
  }
  const double expected = static_cast<double>(nodes) * mp / m;
  const double sigma = std::sqrt(nodes * (double(mp) / m) * (1.0 - double(mp) / m));
  double chi2 = 0.0;
  for (double c : counts) {
    CHECK(std::abs(c - expected) < 3 * sigma);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // 99.9% quantile of chi-square with 15 degrees of freedom.
  CHECK(chi2 < 37.70);
}

TEST_CASE("splitmix rng bounded draws") {
  SplitMixRng rng(4);
  std::vector<int> seen(7, 0);
  for (int k = 0; k < 7000; ++k) ++seen[rng.below(7)];
  for (int c : seen) CHECK(std::abs(c - 1000) < 150);
  std::vector<int> v{1, 2, 3, 4, 5};
  SplitMixRng again(4);
  auto w = v;
  SplitMixRng(9).shuffle(v);
  SplitMixRng(9).shuffle(w);
  CHECK(v == w);
  const double u = again.uniform();
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
}
