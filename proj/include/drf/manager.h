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

#ifndef DRF_MANAGER_H_
#define DRF_MANAGER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "drf/allocation.h"
#include "drf/config.h"
#include "drf/dataset.h"
#include "drf/tree.h"
#include "drf/treebuilder.h"

namespace drf {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
  bool operator==(const Endpoint&) const = default;
};

// Worker roster: "inproc:N" or a list of host:port endpoints.
struct Roster {
  std::uint32_t inproc = 0;
  std::vector<Endpoint> endpoints;

  std::uint32_t size() const {
    return inproc != 0 ? inproc : static_cast<std::uint32_t>(endpoints.size());
  }
};

// Accepts "inproc:N", a comma-separated "host:port" list, or the path of a
// file with one host:port per line.
Roster parse_roster(const std::string& spec);
Endpoint parse_endpoint(std::string_view text);

struct TrainResult {
  Forest forest;
  std::vector<TreeMetrics> metrics;  // Indexed by tree.
  std::vector<SplitterStats> splitter_stats;
  FeatureAllocation allocation;
  SeedContext seed;
  std::uint32_t workers = 0;
  double seconds = 0.0;
};

struct TrainOptions {
  RetryPolicy retry;
  // Fault injection: drop every k-th splitter reply (0 disables).
  std::uint32_t drop_every = 0;
};

// Trains cfg.num_trees trees over the given splitter channels. The dataset
// provides the shape (n, m, classes, column kinds) only.
TrainResult train_forest(const PreparedDataset& ds, const TrainConfig& cfg,
                         const std::vector<Channel*>& splitters, const TrainOptions& options = {});

// Starts the roster's splitters (in-process) or connects to them (sockets).
// The worker count is the roster size.
TrainResult train_forest(std::shared_ptr<const PreparedDataset> ds, const TrainConfig& cfg,
                         const Roster& roster, const TrainOptions& options = {});

// Reproducibility record of a run, as JSON text.
std::string run_manifest_json(const TrainResult& result, const TrainConfig& cfg,
                              const std::string& dataset_ref);

}  // namespace drf

#endif  // DRF_MANAGER_H_
