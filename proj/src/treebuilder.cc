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

#include "drf/treebuilder.h"

#include <algorithm>
#include <chrono>
#include <map>

#include "drf/codec.h"

namespace drf {

LeafReason close_reason(const LabelHistogram& h, std::uint32_t depth, bool has_candidate,
                        const TrainConfig& cfg) {
  if (h.pure()) return LeafReason::kPure;
  if (h.total < cfg.min_records) return LeafReason::kTooSmall;
  if (cfg.max_depth >= 0 && depth >= static_cast<std::uint32_t>(cfg.max_depth)) {
    return LeafReason::kMaxDepth;
  }
  if (!has_candidate) return LeafReason::kNoGain;
  return LeafReason::kInternal;
}

bool drfp_switch_check(double alpha, double mean_closed_depth, std::uint32_t depth,
                       std::uint32_t z, std::uint32_t k) {
  if (depth == 0 || k == 0) return false;
  const double i = depth;
  return alpha * i + (1.0 - alpha) * mean_closed_depth < static_cast<double>(z) * i / k;
}

bool drfp_switch_check(const DepthStats& current, std::uint32_t k) {
  return drfp_switch_check(current.open_fraction, current.mean_closed_depth, current.depth,
                           current.max_worker_features, k);
}

std::vector<char> SplitterPool::live() const {
  std::lock_guard lock(mu_);
  return live_;
}

void SplitterPool::mark_dead(WorkerId w) {
  std::lock_guard lock(mu_);
  live_[w] = 0;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

Envelope request(MsgKind kind, TreeIndex p, std::uint32_t depth,
                 std::vector<std::uint8_t> payload = {}) {
  Envelope e;
  e.kind = kind;
  e.tree = p;
  e.depth = depth;
  e.payload = std::move(payload);
  return e;
}

class Builder {
 public:
  Builder(TreeIndex p, const BuildContext& ctx, TreeMetrics& metrics)
      : p_(p), ctx_(ctx), cfg_(ctx.cfg), pool_(*ctx.splitters), metrics_(metrics) {}

  DecisionTree run();

 private:
  // Round trip to worker w; an unreachable worker is marked dead before the
  // error propagates.
  Envelope call(WorkerId w, const Envelope& e, MsgKind expected) {
    std::atomic<std::uint64_t> retries{0};
    try {
      Envelope reply = roundtrip(pool_.channel(w), e, expected, pool_.retry(), &retries);
      metrics_.retries += retries;
      return reply;
    } catch (const Error& err) {
      metrics_.retries += retries;
      if (err.code() == Errc::kSplitterUnreachable) pool_.mark_dead(w);
      throw;
    }
  }

  // Sends to every live worker, skipping the ones that turn out unreachable.
  // Returns the replies of the workers that answered.
  std::vector<Envelope> call_all(const Envelope& e, MsgKind expected) {
    std::vector<Envelope> replies;
    const auto live = pool_.live();
    for (WorkerId w = 0; w < live.size(); ++w) {
      if (!live[w]) continue;
      try {
        replies.push_back(call(w, e, expected));
      } catch (const Error& err) {
        if (err.code() != Errc::kSplitterUnreachable) throw;
      }
    }
    if (replies.empty()) {
      throw Error(Errc::kSplitterUnreachable, "no splitter answered " +
                                                  std::string(msg_kind_name(e.kind)) +
                                                  " for tree " + std::to_string(p_));
    }
    return replies;
  }

  void close(TreeNode& node, LeafReason reason) {
    node.reason = reason;
    closed_weight_ += node.distribution.total;
    closed_weight_depth_ += static_cast<double>(node.distribution.total) * node.depth;
  }

  void record_classlist() {
    metrics_.classlist_bits.push_back(classes_.storage_bits());
    const std::uint64_t bits =
        std::uint64_t{classes_.n()} * entry_width(classes_.active_leaves(), classes_.has_closed());
    std::uint64_t expected = 64 * ((bits + 63) / 64);
    if (cfg_.classlist_chunk != 0) {
      // Word rounding happens per page.
      expected = 0;
      const unsigned width = entry_width(classes_.active_leaves(), classes_.has_closed());
      for (std::uint64_t start = 0; start < classes_.n(); start += cfg_.classlist_chunk) {
        const std::uint64_t entries = std::min<std::uint64_t>(cfg_.classlist_chunk, classes_.n() - start);
        expected += 64 * ((entries * width + 63) / 64);
      }
    }
    metrics_.classlist_expected_bits.push_back(expected);
  }

  SuperSplit search(std::uint32_t depth, const std::vector<OpenLeaf>& leaves,
                    const std::vector<FeatureIndex>& drawn, DepthStats& stats,
                    std::map<FeatureIndex, WorkerId>& owner);
  ConditionBitmap evaluate(std::uint32_t depth, const SuperSplit& merged,
                           std::map<FeatureIndex, WorkerId>& owner,
                           const std::vector<char>& split_slot);

  TreeIndex p_;
  const BuildContext& ctx_;
  const TrainConfig& cfg_;
  SplitterPool& pool_;
  TreeMetrics& metrics_;

  DecisionTree tree_;
  std::vector<std::uint64_t> keys_;
  ClassList classes_;
  std::vector<std::uint8_t> bags_;
  std::uint64_t root_weight_ = 0;
  std::uint64_t closed_weight_ = 0;
  double closed_weight_depth_ = 0.0;
  bool pruning_ = false;
};

SuperSplit Builder::search(std::uint32_t depth, const std::vector<OpenLeaf>& leaves,
                           const std::vector<FeatureIndex>& drawn, DepthStats& stats,
                           std::map<FeatureIndex, WorkerId>& owner) {
  const std::uint32_t w = ctx_.allocation.workers;
  const std::uint32_t k = (ctx_.m + w - 1) / w;
  for (;;) {
    const auto live = pool_.live();
    DepthAssignment assignment = assign_depth(drawn, ctx_.allocation, live);
    stats.max_worker_features = assignment.z;
    if (!pruning_ && (cfg_.pruning == PruningMode::kOn ||
                      (cfg_.pruning == PruningMode::kAuto && drfp_switch_check(stats, k)))) {
      call_all(request(MsgKind::kEnterPruning, p_, depth), MsgKind::kAck);
      pruning_ = true;
      metrics_.entered_pruning = true;
    }
    stats.pruning = pruning_;

    std::map<WorkerId, std::vector<FeatureIndex>> work;
    owner.clear();
    for (std::size_t q = 0; q < drawn.size(); ++q) {
      work[assignment.worker[q]].push_back(drawn[q]);
      owner[drawn[q]] = assignment.worker[q];
    }
    std::vector<SuperSplit> parts;
    bool lost_worker = false;
    for (auto& [worker, features] : work) {
      std::sort(features.begin(), features.end());
      SupersplitRequest msg{leaves, features};
      try {
        Envelope reply = call(worker, request(MsgKind::kRequestSupersplit, p_, depth,
                                              encode_payload(msg)),
                              MsgKind::kPartialSupersplit);
        parts.push_back(decode_supersplit_payload(reply.payload));
      } catch (const Error& err) {
        if (err.code() != Errc::kSplitterUnreachable) throw;
        lost_worker = true;
        break;
      }
    }
    if (lost_worker) continue;  // Reassign the whole depth to the survivors.

    DepthDispatch dispatch;
    dispatch.depth = depth;
    dispatch.features = drawn;
    dispatch.workers = assignment.worker;
    metrics_.dispatch.push_back(std::move(dispatch));
    ++metrics_.supersplit_rounds;
    return merge_supersplits(parts);
  }
}

ConditionBitmap Builder::evaluate(std::uint32_t depth, const SuperSplit& merged,
                                  std::map<FeatureIndex, WorkerId>& owner,
                                  const std::vector<char>& split_slot) {
  const auto& ids = classes_.leaf_ids();
  std::vector<WorkerId> slot_worker(ids.size(), 0);
  for (;;) {
    std::map<WorkerId, std::vector<EvaluationItem>> work;
    for (std::size_t s = 0; s < ids.size(); ++s) {
      if (!split_slot[s]) continue;
      const SplitCandidate& c = merged.at(ids[s]);
      slot_worker[s] = owner.at(c.feature);
      work[slot_worker[s]].push_back({c.leaf, c.feature, c.condition});
    }
    std::map<WorkerId, std::size_t> expected;
    for (SampleIndex i = 0; i < classes_.n(); ++i) {
      const std::uint32_t s = classes_.slot(i);
      if (s != ClassList::kClosedSlot && split_slot[s] && bags_[i] > 0) ++expected[slot_worker[s]];
    }
    std::map<WorkerId, ConditionBitmap> parts;
    std::optional<WorkerId> lost;
    for (const auto& [worker, items] : work) {
      try {
        Envelope reply = call(worker, request(MsgKind::kEvaluateConditions, p_, depth,
                                              encode_payload(items)),
                              MsgKind::kBitmap);
        ConditionBitmap bits = decode_bitmap_payload(reply.payload);
        if (bits.size() != expected[worker]) {
          throw Error(Errc::kBitmapLengthMismatch,
                      "splitter " + std::to_string(worker) + " returned " +
                          std::to_string(bits.size()) + " bits, expected " +
                          std::to_string(expected[worker]));
        }
        parts[worker] = std::move(bits);
      } catch (const Error& err) {
        if (err.code() != Errc::kSplitterUnreachable) throw;
        lost = worker;
        break;
      }
    }
    if (lost) {
      // Move the lost worker's features to a live replica.
      const auto live = pool_.live();
      for (auto& [j, w] : owner) {
        if (live[w]) continue;
        const auto& placement = ctx_.allocation.placement[j];
        auto it = std::find_if(placement.begin(), placement.end(),
                               [&](WorkerId x) { return live[x] != 0; });
        if (it == placement.end()) {
          throw Error(Errc::kSplitterUnreachable,
                      "no live replica stores feature " + std::to_string(j));
        }
        w = *it;
      }
      continue;
    }

    ConditionBitmap combined;
    std::map<WorkerId, std::size_t> cursor;
    for (SampleIndex i = 0; i < classes_.n(); ++i) {
      const std::uint32_t s = classes_.slot(i);
      if (s == ClassList::kClosedSlot || !split_slot[s] || bags_[i] == 0) continue;
      const WorkerId w = slot_worker[s];
      combined.push_back(parts[w].get(cursor[w]++));
    }
    ++metrics_.evaluation_rounds;
    return combined;
  }
}

DecisionTree Builder::run() {
  const auto start = Clock::now();
  tree_.index = p_;
  bags_ = bag_column(ctx_.n, p_, ctx_.seed);
  classes_ = ClassList::init_root(ctx_.n, 0, cfg_.classlist_chunk);

  auto censuses = call_all(request(MsgKind::kBeginTree, p_, 0), MsgKind::kCensus);
  TreeNode root;
  root.distribution = decode_histogram_payload(censuses.front().payload);
  for (const auto& c : censuses) {
    if (decode_histogram_payload(c.payload) != root.distribution) {
      throw Error(Errc::kProtocolDesync, "splitters disagree on the bagged label census");
    }
  }
  root_weight_ = root.distribution.total;
  tree_.nodes.push_back(root);
  keys_.push_back(kRootKey);
  if (const LeafReason r = close_reason(root.distribution, 0, true, cfg_); r != LeafReason::kInternal) {
    close(tree_.nodes[0], r);
    classes_.apply_depth_update(DepthUpdate{{}, {0}}, bags_, ConditionBitmap{});
  }

  for (std::uint32_t depth = 0; classes_.active_leaves() > 0; ++depth) {
    const auto depth_start = Clock::now();
    record_classlist();
    const auto& ids = classes_.leaf_ids();

    DepthStats stats;
    stats.depth = depth;
    stats.open_leaves = static_cast<std::uint32_t>(ids.size());
    std::vector<OpenLeaf> leaves;
    std::uint64_t open_weight = 0;
    for (NodeId id : ids) {
      leaves.push_back({id, keys_[id], tree_.nodes[id].distribution});
      open_weight += tree_.nodes[id].distribution.total;
    }
    stats.open_fraction =
        root_weight_ == 0 ? 0.0 : static_cast<double>(open_weight) / static_cast<double>(root_weight_);
    stats.mean_closed_depth = closed_weight_ == 0 ? 0.0 : closed_weight_depth_ / static_cast<double>(closed_weight_);
    for (SampleIndex i = 0; i < classes_.n(); ++i) {
      if (bags_[i] > 0 && classes_.slot(i) != ClassList::kClosedSlot) ++stats.bagged_open_samples;
    }
    metrics_.bagged_open_total += stats.bagged_open_samples;

    // Union of the per-leaf candidate draws, in draw order.
    std::vector<FeatureIndex> drawn;
    std::vector<char> seen(ctx_.m, 0);
    for (std::size_t s = 0; s < leaves.size(); ++s) {
      if (cfg_.usb && s > 0) break;
      for (FeatureIndex j : candidate_features(leaves[s].key, depth, p_, cfg_.plan(), ctx_.m, ctx_.seed)) {
        if (!seen[j]) {
          seen[j] = 1;
          drawn.push_back(j);
        }
      }
    }
    stats.drawn_features = static_cast<std::uint32_t>(drawn.size());

    std::map<FeatureIndex, WorkerId> owner;
    const SuperSplit merged = search(depth, leaves, drawn, stats, owner);

    DepthUpdate update;
    std::vector<char> split_slot(ids.size(), 0);
    const std::vector<NodeId> open_ids = ids;
    for (std::size_t s = 0; s < open_ids.size(); ++s) {
      const NodeId id = open_ids[s];
      auto it = merged.find(id);
      if (it == merged.end()) {
        close(tree_.nodes[id], LeafReason::kNoGain);
        update.closures.push_back(id);
        continue;
      }
      split_slot[s] = 1;
      const SplitCandidate& c = it->second;
      const auto pos = static_cast<NodeId>(tree_.nodes.size());
      const NodeId neg = pos + 1;
      for (int branch = 0; branch < 2; ++branch) {
        TreeNode child;
        child.id = branch == 0 ? pos : neg;
        child.depth = depth + 1;
        child.parent = id;
        child.distribution = branch == 0 ? c.positive : c.negative;
        tree_.nodes.push_back(std::move(child));
        keys_.push_back(child_key(keys_[id], branch == 0));
      }
      TreeNode& parent = tree_.nodes[id];
      parent.feature = c.feature;
      parent.condition = c.condition;
      parent.score = c.score;
      parent.positive = pos;
      parent.negative = neg;
      update.splits.push_back({id, pos, neg});
      for (NodeId child : {pos, neg}) {
        TreeNode& node = tree_.nodes[child];
        const LeafReason r = close_reason(node.distribution, node.depth, true, cfg_);
        if (r != LeafReason::kInternal) {
          close(node, r);
          update.closures.push_back(child);
        }
      }
    }

    BroadcastMsg msg;
    msg.update = update;
    msg.has_bitmap = !update.splits.empty();
    if (msg.has_bitmap) msg.bitmap = evaluate(depth, merged, owner, split_slot);
    call_all(request(MsgKind::kBroadcastUpdate, p_, depth, encode_payload(msg)), MsgKind::kAck);
    ++metrics_.broadcast_rounds;
    if (msg.has_bitmap) {
      metrics_.bitmap_bits += ConditionBitmap::kHeaderBits + msg.bitmap.size();
      metrics_.bitmap_wire_bits += msg.bitmap.wire_bits();
      ++metrics_.bitmaps_sent;
    }
    classes_.apply_depth_update(update, bags_, msg.bitmap);
    ++metrics_.levels;
    stats.seconds = seconds_since(depth_start);
    tree_.depth_stats.push_back(stats);
  }
  record_classlist();

  try {
    call_all(request(MsgKind::kEndTree, p_, metrics_.levels), MsgKind::kAck);
  } catch (const Error&) {
    // State left behind on a dead splitter is harmless.
  }
  metrics_.seconds = seconds_since(start);
  return std::move(tree_);
}

}  // namespace

DecisionTree build_tree(TreeIndex p, const BuildContext& ctx, TreeMetrics* metrics) {
  TreeMetrics local;
  TreeMetrics& m = metrics ? *metrics : local;
  m = TreeMetrics{};
  m.tree = p;
  Builder builder(p, ctx, m);
  return builder.run();
}

Envelope TreeBuilderService::handle(const Envelope& req) {
  if (req.kind != MsgKind::kRequestTree) {
    throw Error(Errc::kProtocolDesync,
                "tree builder cannot serve " + std::string(msg_kind_name(req.kind)));
  }
  TreeMetrics metrics;
  DecisionTree tree = build_tree(req.tree, ctx_, &metrics);
  ByteWriter w;
  encode_tree(tree, w, true);
  w.bytes(encode_metrics(metrics));
  Envelope out;
  out.kind = MsgKind::kTree;
  out.tree = req.tree;
  out.depth = req.depth;
  out.payload = w.release();
  return out;
}

std::vector<std::uint8_t> encode_metrics(const TreeMetrics& m) {
  ByteWriter w;
  w.u32(m.tree);
  w.u32(m.levels);
  w.u32(m.supersplit_rounds);
  w.u32(m.evaluation_rounds);
  w.u32(m.broadcast_rounds);
  w.u64(m.bitmap_bits);
  w.u64(m.bitmap_wire_bits);
  w.u64(m.bitmaps_sent);
  w.u64(m.bagged_open_total);
  w.u64(m.classlist_bits.size());
  for (std::size_t k = 0; k < m.classlist_bits.size(); ++k) {
    w.u64(m.classlist_bits[k]);
    w.u64(m.classlist_expected_bits[k]);
  }
  w.u64(m.dispatch.size());
  for (const auto& d : m.dispatch) {
    w.u32(d.depth);
    encode(w, d.features);
    encode(w, d.workers);
  }
  w.u64(m.retries);
  w.u8(m.entered_pruning ? 1 : 0);
  w.f64(m.seconds);
  return w.release();
}

TreeMetrics decode_metrics(ByteReader& r) {
  TreeMetrics m;
  m.tree = r.u32();
  m.levels = r.u32();
  m.supersplit_rounds = r.u32();
  m.evaluation_rounds = r.u32();
  m.broadcast_rounds = r.u32();
  m.bitmap_bits = r.u64();
  m.bitmap_wire_bits = r.u64();
  m.bitmaps_sent = r.u64();
  m.bagged_open_total = r.u64();
  const std::uint64_t depths = r.u64();
  for (std::uint64_t k = 0; k < depths; ++k) {
    m.classlist_bits.push_back(r.u64());
    m.classlist_expected_bits.push_back(r.u64());
  }
  m.dispatch.resize(r.u64());
  for (auto& d : m.dispatch) {
    d.depth = r.u32();
    d.features = decode_u32_vector(r);
    d.workers = decode_u32_vector(r);
  }
  m.retries = r.u64();
  m.entered_pruning = r.u8() != 0;
  m.seconds = r.f64();
  return m;
}

}  // namespace drf
