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

#ifndef DRF_CONFIG_H_
#define DRF_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "drf/seeding.h"
#include "drf/split.h"

namespace drf {

enum class PruningMode : std::uint8_t {
  kAuto = 0,  // Switch when the pruning rule fires.
  kOn = 1,    // Pruned scans from the root depth.
  kOff = 2,
};

std::string_view pruning_name(PruningMode m);
PruningMode parse_pruning(std::string_view name);

// Every hyperparameter of a run. The same value drives the distributed engine
// and the sequential reference trainer.
struct TrainConfig {
  std::uint32_t num_trees = 10;
  // 0 selects ceil(sqrt(m)).
  std::uint32_t m_prime = 0;
  // Leaves at this depth are closed; -1 means unlimited.
  std::int32_t max_depth = 20;
  // Minimum bag-weighted records per branch and per splittable leaf.
  std::uint64_t min_records = 1;
  Criterion criterion = Criterion::kGini;
  bool usb = false;
  std::uint32_t redundancy = 1;
  std::uint32_t workers = 1;
  std::uint64_t seed = 1;
  PruningMode pruning = PruningMode::kAuto;
  // Trees built concurrently by the manager.
  std::uint32_t parallel_trees = 1;
  // Threads per categorical scan (shard-parallel accumulation).
  std::uint32_t categorical_threads = 1;
  // Class-list page size in samples; 0 keeps one contiguous block.
  std::uint64_t classlist_chunk = 0;
  // Reference trainer refuses datasets with more than this many cells.
  std::uint64_t oracle_cell_cap = 1ull << 28;

  CandidatePlan plan() const { return CandidatePlan{usb, m_prime}; }
  // Throws InvalidArgument naming the offending key.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

// Sets one key from its textual value; keys match the flag names with
// underscores (num_trees, max_depth, min_records, ...).
void set_config_key(TrainConfig& cfg, std::string_view key, std::string_view value);

// Flat "key = value" text, '#' comments.
TrainConfig parse_config(std::string_view text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});
std::string format_config(const TrainConfig& cfg);

}  // namespace drf

#endif  // DRF_CONFIG_H_
