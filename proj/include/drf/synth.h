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

#ifndef DRF_SYNTH_H_
#define DRF_SYNTH_H_

#include <cstdint>
#include <string_view>

#include "drf/dataset.h"

namespace drf {

enum class Family { kXor, kMajority, kNeedle };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// Informative columns hold 0/1 bits (as numerical values), useless columns
// uniform reals in [0, 1). Labels depend on the bits only:
//   Majority: 1 when at least half of the bits are set;
//   Xor: parity of the bits;
//   Needle: 1 when the bit count reaches the smallest threshold whose
//   binomial tail is at most positive_rate.
struct SyntheticSpec {
  Family family = Family::kMajority;
  std::uint64_t n = 1000;
  std::uint32_t informative = 2;
  std::uint32_t useless = 0;
  std::uint64_t seed = 1;
  double positive_rate = 0.05;  // Needle only.
  // Held-out rows; 0 selects n / 4.
  std::uint64_t test_n = 0;
};

struct SyntheticData {
  PreparedDataset train;  // Unsorted.
  PreparedDataset test;
};

SyntheticData generate(const SyntheticSpec& spec);

// Random mixed-type classification dataset for engine/reference
// comparisons: n in [min_n, max_n], m in [2, max_m], numerical columns
// (continuous or integer-valued with many ties), categorical columns of arity
// 2..8, 2..4 classes whose labels depend on a few columns plus noise.
struct CorpusShape {
  std::uint64_t min_n = 50;
  std::uint64_t max_n = 2000;
  std::uint32_t max_m = 20;
};

PreparedDataset random_dataset(std::uint64_t seed, const CorpusShape& shape = {});

// Needle threshold on the bit count for `informative` bits.
std::uint32_t needle_threshold(std::uint32_t informative, double positive_rate);

}  // namespace drf

#endif  // DRF_SYNTH_H_
