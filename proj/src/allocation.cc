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

#include "drf/allocation.h"

#include <algorithm>
#include <numeric>

#include "drf/seeding.h"

namespace drf {

std::vector<FeatureIndex> FeatureAllocation::owned_by(WorkerId w) const {
  std::vector<FeatureIndex> out;
  for (FeatureIndex j = 0; j < placement.size(); ++j) {
    const auto& p = placement[j];
    if (std::find(p.begin(), p.end(), w) != p.end()) out.push_back(j);
  }
  return out;
}

FeatureAllocation allocate(std::uint32_t m, std::uint32_t w, std::uint32_t d, std::uint64_t seed) {
  if (w == 0 || d == 0 || d > w) {
    throw Error(Errc::kInvalidArgument, "allocate needs w >= 1 and 1 <= d <= w");
  }
  FeatureAllocation alloc;
  alloc.workers = w;
  alloc.redundancy = d;
  alloc.placement.resize(m);
  SplitMixRng rng(splitmix64(seed ^ 0x5851F42D4C957F2Dull));
  std::vector<FeatureIndex> order(m);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<WorkerId> others(w);
  for (std::uint32_t k = 0; k < m; ++k) {
    auto& p = alloc.placement[order[k]];
    const WorkerId primary = k % w;
    p.push_back(primary);
    if (d == 1) continue;
    if (d == w) {
      for (WorkerId x = 0; x < w; ++x) {
        if (x != primary) p.push_back(x);
      }
      continue;
    }
    std::iota(others.begin(), others.end(), 0);
    std::swap(others[primary], others[w - 1]);
    // Partial shuffle of the w - 1 non-primary workers.
    for (std::uint32_t r = 0; r + 1 < d; ++r) {
      const std::uint64_t pick = r + rng.below(w - 1 - r);
      std::swap(others[r], others[pick]);
      p.push_back(others[r]);
    }
  }
  return alloc;
}

DepthAssignment assign_depth(std::span<const FeatureIndex> drawn, const FeatureAllocation& alloc,
                             std::span<const char> live) {
  DepthAssignment out;
  out.load.assign(alloc.workers, 0);
  out.worker.reserve(drawn.size());
  for (FeatureIndex j : drawn) {
    if (j >= alloc.placement.size() || alloc.placement[j].empty()) {
      throw Error(Errc::kUnplacedFeature, "feature " + std::to_string(j) + " has no placement");
    }
    WorkerId best = 0;
    bool found = false;
    for (WorkerId x : alloc.placement[j]) {
      if (!live.empty() && !live[x]) continue;
      if (!found || out.load[x] < out.load[best] || (out.load[x] == out.load[best] && x < best)) {
        best = x;
        found = true;
      }
    }
    if (!found) {
      throw Error(Errc::kSplitterUnreachable,
                  "no live replica stores feature " + std::to_string(j));
    }
    out.worker.push_back(best);
    out.z = std::max(out.z, ++out.load[best]);
  }
  return out;
}

}  // namespace drf
