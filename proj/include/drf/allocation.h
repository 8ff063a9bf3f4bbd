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

#ifndef DRF_ALLOCATION_H_
#define DRF_ALLOCATION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "drf/common.h"

namespace drf {

// Feature placement over w workers with redundancy d.
struct FeatureAllocation {
  std::uint32_t workers = 1;
  std::uint32_t redundancy = 1;
  // placement[j]: distinct workers storing feature j; the first is the primary.
  std::vector<std::vector<WorkerId>> placement;

  std::vector<FeatureIndex> owned_by(WorkerId w) const;
  bool operator==(const FeatureAllocation&) const = default;
};

// Primary owners are dealt round-robin over a seeded shuffle of the features,
// so d = 1 is balanced; further replicas are seeded uniform draws among the
// remaining workers.
FeatureAllocation allocate(std::uint32_t m, std::uint32_t w, std::uint32_t d, std::uint64_t seed);

struct DepthAssignment {
  // worker[k] serves drawn[k].
  std::vector<WorkerId> worker;
  std::vector<std::uint32_t> load;
  // Z: largest per-worker load.
  std::uint32_t z = 0;
};

// Greedy least-load dispatch in draw order; ties go to the lowest worker id.
// Workers with live[w] == 0 are skipped when `live` is non-empty.
DepthAssignment assign_depth(std::span<const FeatureIndex> drawn, const FeatureAllocation& alloc,
                             std::span<const char> live = {});

}  // namespace drf

#endif  // DRF_ALLOCATION_H_
