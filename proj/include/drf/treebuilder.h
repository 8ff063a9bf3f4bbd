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

#ifndef DRF_TREEBUILDER_H_
#define DRF_TREEBUILDER_H_

#include <atomic>
#include <cstdint>
#include <mutex>
#include <vector>

#include "drf/allocation.h"
#include "drf/config.h"
#include "drf/tree.h"
#include "drf/transport.h"

namespace drf {

// Closure reason for a leaf with bag-weighted histogram `h` at `depth`, or
// kInternal when it stays open. `has_candidate` is false once a search found
// no split with positive score.
LeafReason close_reason(const LabelHistogram& h, std::uint32_t depth, bool has_candidate,
                        const TrainConfig& cfg);

// Pruning rule for depth i >= 1:
//   alpha_i * i + (1 - alpha_i) * mean_closed_depth_i < Z_i * i / K.
bool drfp_switch_check(double alpha, double mean_closed_depth, std::uint32_t depth,
                       std::uint32_t z, std::uint32_t k);
bool drfp_switch_check(const DepthStats& current, std::uint32_t k);

// Features owner per drawn candidate at one depth.
struct DepthDispatch {
  std::uint32_t depth = 0;
  std::vector<FeatureIndex> features;
  std::vector<WorkerId> workers;
};

// Instrumentation of one tree build.
struct TreeMetrics {
  TreeIndex tree = 0;
  // Depths searched; equals every round counter below.
  std::uint32_t levels = 0;
  std::uint32_t supersplit_rounds = 0;
  std::uint32_t evaluation_rounds = 0;
  std::uint32_t broadcast_rounds = 0;
  // Broadcast condition bitmaps: header bits plus one bit per sample.
  std::uint64_t bitmap_bits = 0;
  // Same, padded to whole bytes as sent.
  std::uint64_t bitmap_wire_bits = 0;
  std::uint64_t bitmaps_sent = 0;
  // Sum over depths of bagged samples in open leaves.
  std::uint64_t bagged_open_total = 0;
  // Class-list storage at the start of each searched depth and after the
  // last update, with the formula value n * width rounded up to words.
  std::vector<std::uint64_t> classlist_bits;
  std::vector<std::uint64_t> classlist_expected_bits;
  std::vector<DepthDispatch> dispatch;
  std::uint64_t retries = 0;
  bool entered_pruning = false;
  double seconds = 0.0;
};

// Live view of the splitters shared by concurrent tree builders.
class SplitterPool {
 public:
  SplitterPool(std::vector<Channel*> channels, RetryPolicy retry = {})
      : channels_(std::move(channels)), live_(channels_.size(), 1), retry_(retry) {}

  std::size_t size() const { return channels_.size(); }
  Channel& channel(WorkerId w) { return *channels_[w]; }
  std::vector<char> live() const;
  void mark_dead(WorkerId w);
  const RetryPolicy& retry() const { return retry_; }

 private:
  std::vector<Channel*> channels_;
  mutable std::mutex mu_;
  std::vector<char> live_;
  RetryPolicy retry_;
};

struct BuildContext {
  TrainConfig cfg;
  SeedContext seed;
  std::uint64_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t num_classes = 0;
  FeatureAllocation allocation;
  SplitterPool* splitters = nullptr;
};

// Depth-synchronous construction of tree p against configured splitters.
DecisionTree build_tree(TreeIndex p, const BuildContext& ctx, TreeMetrics* metrics = nullptr);

// Serves RequestTree by building the requested tree.
class TreeBuilderService : public Service {
 public:
  explicit TreeBuilderService(const BuildContext& ctx) : ctx_(ctx) {}
  Envelope handle(const Envelope& request) override;

 private:
  const BuildContext& ctx_;
};

std::vector<std::uint8_t> encode_metrics(const TreeMetrics& m);
TreeMetrics decode_metrics(ByteReader& r);

}  // namespace drf

#endif  // DRF_TREEBUILDER_H_
