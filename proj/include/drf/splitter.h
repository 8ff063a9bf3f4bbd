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

#ifndef DRF_SPLITTER_H_
#define DRF_SPLITTER_H_

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "drf/classlist.h"
#include "drf/dataset.h"
#include "drf/protocol.h"
#include "drf/transport.h"

namespace drf {

// Column-owning worker. Keeps one class list and bag cache per tree under
// construction, answers supersplit and condition requests for its owned
// columns and applies the broadcast updates.
class SplitterService : public Service {
 public:
  explicit SplitterService(std::shared_ptr<const PreparedDataset> dataset);

  Envelope handle(const Envelope& request) override;
  SplitterStats stats() const;

 private:
  using PrunedColumn = std::variant<std::vector<NumericalEntry>, std::vector<IndexedCategoricalEntry>>;

  struct TreeState {
    std::mutex mu;
    ClassList classes;
    std::vector<std::uint8_t> bags;
    // Depth of the next supersplit request.
    std::uint32_t depth = 0;
    std::optional<std::uint32_t> last_broadcast;
    bool pruning = false;
    std::map<FeatureIndex, PrunedColumn> pruned;
    std::map<FeatureIndex, ColumnCounters> counters;
  };

  Envelope configure(const Envelope& request);
  Envelope begin_tree(const Envelope& request);
  Envelope supersplit(const Envelope& request, TreeState& state);
  Envelope evaluate(const Envelope& request, TreeState& state);
  Envelope broadcast(const Envelope& request, TreeState& state);
  Envelope enter_pruning(const Envelope& request, TreeState& state);
  Envelope end_tree(const Envelope& request);

  std::shared_ptr<TreeState> find_tree(const Envelope& request);
  void check_owned(FeatureIndex j) const;
  void materialize(TreeState& state);

  std::shared_ptr<const PreparedDataset> dataset_;

  mutable std::mutex mu_;
  std::optional<ConfigureMsg> config_;
  std::vector<char> owned_;
  std::map<TreeIndex, std::shared_ptr<TreeState>> trees_;
  std::vector<ColumnCounters> retired_;
  std::atomic<std::uint64_t> write_bytes_{0};
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> duplicate_broadcasts_{0};
};

}  // namespace drf

#endif  // DRF_SPLITTER_H_
