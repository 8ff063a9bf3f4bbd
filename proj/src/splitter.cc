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

#include "drf/splitter.h"

#include <algorithm>

#include "drf/seeding.h"
#include "drf/split.h"

namespace drf {

SplitterService::SplitterService(std::shared_ptr<const PreparedDataset> dataset)
    : dataset_(std::move(dataset)) {
  if (!dataset_->is_sorted()) {
    throw Error(Errc::kInvalidArgument, "splitters need a presorted dataset");
  }
}

namespace {

Envelope reply(const Envelope& request, MsgKind kind, std::vector<std::uint8_t> payload = {}) {
  Envelope e;
  e.kind = kind;
  e.tree = request.tree;
  e.depth = request.depth;
  e.payload = std::move(payload);
  return e;
}

}  // namespace

Envelope SplitterService::handle(const Envelope& request) {
  ++requests_;
  switch (request.kind) {
    case MsgKind::kConfigure:
      return configure(request);
    case MsgKind::kBeginTree:
      return begin_tree(request);
    case MsgKind::kEndTree:
      return end_tree(request);
    case MsgKind::kRequestStats:
      return reply(request, MsgKind::kStats, encode_payload(stats()));
    case MsgKind::kRequestSupersplit:
    case MsgKind::kEvaluateConditions:
    case MsgKind::kBroadcastUpdate:
    case MsgKind::kEnterPruning: {
      auto state = find_tree(request);
      std::lock_guard lock(state->mu);
      if (request.kind == MsgKind::kRequestSupersplit) return supersplit(request, *state);
      if (request.kind == MsgKind::kEvaluateConditions) return evaluate(request, *state);
      if (request.kind == MsgKind::kBroadcastUpdate) return broadcast(request, *state);
      return enter_pruning(request, *state);
    }
    default:
      throw Error(Errc::kProtocolDesync,
                  "splitter cannot serve " + std::string(msg_kind_name(request.kind)));
  }
}

Envelope SplitterService::configure(const Envelope& request) {
  ConfigureMsg msg = decode_configure(request.payload);
  const PreparedDataset& ds = *dataset_;
  if (msg.n != ds.n() || msg.m != ds.m() || msg.num_classes != ds.num_classes()) {
    throw Error(Errc::kInvalidArgument,
                "dataset shape mismatch: manager has n=" + std::to_string(msg.n) +
                    " m=" + std::to_string(msg.m) + ", splitter has n=" + std::to_string(ds.n()) +
                    " m=" + std::to_string(ds.m()));
  }
  std::vector<char> owned(ds.m(), 0);
  for (FeatureIndex j : msg.owned) {
    if (j >= ds.m()) throw Error(Errc::kIndexOutOfRange, "owned feature " + std::to_string(j));
    owned[j] = 1;
  }
  std::lock_guard lock(mu_);
  config_ = std::move(msg);
  owned_ = std::move(owned);
  trees_.clear();
  retired_.clear();
  write_bytes_ = 0;
  duplicate_broadcasts_ = 0;
  return reply(request, MsgKind::kAck);
}

Envelope SplitterService::begin_tree(const Envelope& request) {
  auto state = std::make_shared<TreeState>();
  ConfigureMsg cfg;
  {
    std::lock_guard lock(mu_);
    if (!config_) throw Error(Errc::kProtocolDesync, "splitter not configured");
    cfg = *config_;
  }
  const PreparedDataset& ds = *dataset_;
  state->classes = ClassList::init_root(ds.n(), 0, cfg.classlist_chunk);
  state->bags = bag_column(ds.n(), request.tree, cfg.seed);
  LabelHistogram census(ds.num_classes());
  for (SampleIndex i = 0; i < ds.n(); ++i) {
    if (state->bags[i] > 0) census.add(ds.labels[i], state->bags[i]);
  }
  std::lock_guard lock(mu_);
  // A retried BeginTree replaces the state; nothing has been applied yet.
  trees_[request.tree] = state;
  return reply(request, MsgKind::kCensus, encode_payload(census));
}

Envelope SplitterService::end_tree(const Envelope& request) {
  std::lock_guard lock(mu_);
  auto it = trees_.find(request.tree);
  if (it != trees_.end()) {
    std::lock_guard tree_lock(it->second->mu);
    for (const auto& [j, c] : it->second->counters) retired_.push_back(c);
    trees_.erase(it);
  }
  return reply(request, MsgKind::kAck);
}

std::shared_ptr<SplitterService::TreeState> SplitterService::find_tree(const Envelope& request) {
  std::lock_guard lock(mu_);
  auto it = trees_.find(request.tree);
  if (it == trees_.end()) {
    throw Error(Errc::kProtocolDesync, "no tree " + std::to_string(request.tree) + " in progress");
  }
  return it->second;
}

void SplitterService::check_owned(FeatureIndex j) const {
  if (j >= owned_.size() || !owned_[j]) {
    throw Error(Errc::kFeatureNotOwned, "feature " + std::to_string(j) + " is not stored here");
  }
}

Envelope SplitterService::supersplit(const Envelope& request, TreeState& state) {
  if (request.depth != state.depth) {
    throw Error(Errc::kProtocolDesync, "supersplit for depth " + std::to_string(request.depth) +
                                           ", class list is at depth " +
                                           std::to_string(state.depth));
  }
  SupersplitRequest msg = decode_supersplit_request(request.payload);
  const ConfigureMsg& cfg = *config_;
  const auto& ids = state.classes.leaf_ids();
  if (msg.leaves.size() != ids.size()) {
    throw Error(Errc::kProtocolDesync, "open leaf census disagrees with the class list");
  }
  for (std::size_t s = 0; s < ids.size(); ++s) {
    if (msg.leaves[s].id != ids[s]) {
      throw Error(Errc::kProtocolDesync, "open leaf census disagrees with the class list");
    }
  }
  for (FeatureIndex j : msg.features) check_owned(j);

  // Candidate sets come from the shared seed, not from the wire.
  std::vector<std::vector<FeatureIndex>> drawn(msg.leaves.size());
  for (std::size_t s = 0; s < msg.leaves.size(); ++s) {
    if (cfg.plan.usb && s > 0) {
      drawn[s] = drawn[0];
    } else {
      drawn[s] = candidate_features(msg.leaves[s].key, request.depth, request.tree, cfg.plan,
                                    cfg.m, cfg.seed);
    }
  }
  const ScanParams params{cfg.criterion, cfg.min_records, cfg.num_classes};
  const PreparedDataset& ds = *dataset_;
  std::vector<SuperSplit> parts;
  for (FeatureIndex j : msg.features) {
    CandidateMask mask(msg.leaves.size(), 0);
    for (std::size_t s = 0; s < drawn.size(); ++s) {
      mask[s] = std::binary_search(drawn[s].begin(), drawn[s].end(), j);
    }
    ColumnCounters& counters = state.counters[j];
    counters.tree = request.tree;
    counters.feature = j;
    ++counters.scans;
    auto pruned = state.pruned.find(j);
    if (ds.specs[j].kind == ColumnKind::kNumerical) {
      std::span<const NumericalEntry> entries = ds.numerical(j).entries;
      if (pruned != state.pruned.end()) entries = std::get<0>(pruned->second);
      counters.entries_read += entries.size();
      parts.push_back(
          numerical_supersplit(j, entries, state.classes, state.bags, msg.leaves, mask, params));
    } else {
      const std::uint32_t arity = *ds.specs[j].arity();
      if (pruned != state.pruned.end()) {
        const auto& entries = std::get<1>(pruned->second);
        counters.entries_read += entries.size();
        parts.push_back(categorical_supersplit(j, arity, entries, state.classes, state.bags,
                                               msg.leaves, mask, params));
      } else {
        const auto& col = ds.categorical(j);
        counters.entries_read += col.values.size();
        parts.push_back(categorical_supersplit(j, arity, col.values, col.shard_bounds,
                                               state.classes, state.bags, msg.leaves, mask,
                                               params, cfg.categorical_threads));
      }
    }
  }
  return reply(request, MsgKind::kPartialSupersplit, encode_payload(merge_supersplits(parts)));
}

Envelope SplitterService::evaluate(const Envelope& request, TreeState& state) {
  if (request.depth != state.depth) {
    throw Error(Errc::kProtocolDesync, "evaluation for depth " + std::to_string(request.depth) +
                                           ", class list is at depth " +
                                           std::to_string(state.depth));
  }
  std::vector<EvaluationItem> items = decode_evaluation_items(request.payload);
  const ClassList& cl = state.classes;
  const auto& ids = cl.leaf_ids();
  const PreparedDataset& ds = *dataset_;

  // Slot of each requested leaf, grouped by feature.
  std::map<FeatureIndex, SlotConditions> by_feature;
  std::vector<int> slot_feature(ids.size(), -1);
  for (const auto& item : items) {
    check_owned(item.feature);
    auto it = std::lower_bound(ids.begin(), ids.end(), item.leaf);
    if (it == ids.end() || *it != item.leaf) {
      throw Error(Errc::kProtocolDesync, "leaf " + std::to_string(item.leaf) + " is not open");
    }
    const auto s = static_cast<std::size_t>(it - ids.begin());
    const bool numerical = ds.specs[item.feature].kind == ColumnKind::kNumerical;
    if (numerical != std::holds_alternative<NumericalCondition>(item.condition)) {
      throw Error(Errc::kInvalidArgument, "condition kind does not match feature " +
                                              std::to_string(item.feature));
    }
    auto& conditions = by_feature[item.feature];
    conditions.resize(ids.size(), nullptr);
    conditions[s] = &item.condition;
    slot_feature[s] = static_cast<int>(item.feature);
  }

  std::map<FeatureIndex, ConditionBitmap> bits;
  for (const auto& [j, conditions] : by_feature) {
    ColumnCounters& counters = state.counters[j];
    counters.tree = request.tree;
    counters.feature = j;
    ++counters.evaluations;
    auto pruned = state.pruned.find(j);
    if (ds.specs[j].kind == ColumnKind::kNumerical) {
      std::span<const NumericalEntry> entries = ds.numerical(j).entries;
      if (pruned != state.pruned.end()) entries = std::get<0>(pruned->second);
      bits[j] = evaluate_numerical(entries, cl, state.bags, conditions);
    } else if (pruned != state.pruned.end()) {
      bits[j] = evaluate_categorical(std::span<const IndexedCategoricalEntry>(
                                         std::get<1>(pruned->second)),
                                     cl, state.bags, conditions);
    } else {
      bits[j] = evaluate_categorical(std::span<const CategoricalEntry>(ds.categorical(j).values),
                                     cl, state.bags, conditions);
    }
  }

  // Interleave the per-feature bitmaps back into ascending sample order.
  ConditionBitmap out;
  std::map<FeatureIndex, std::size_t> cursor;
  for (SampleIndex i = 0; i < cl.n(); ++i) {
    const std::uint32_t s = cl.slot(i);
    if (s == ClassList::kClosedSlot || slot_feature[s] < 0 || state.bags[i] == 0) continue;
    const auto j = static_cast<FeatureIndex>(slot_feature[s]);
    out.push_back(bits[j].get(cursor[j]++));
  }
  return reply(request, MsgKind::kBitmap, encode_payload(out));
}

Envelope SplitterService::broadcast(const Envelope& request, TreeState& state) {
  if (state.last_broadcast && *state.last_broadcast == request.depth) {
    ++duplicate_broadcasts_;
    return reply(request, MsgKind::kAck);
  }
  if (request.depth != state.depth) {
    throw Error(Errc::kProtocolDesync, "update for depth " + std::to_string(request.depth) +
                                           ", class list is at depth " +
                                           std::to_string(state.depth));
  }
  BroadcastMsg msg = decode_broadcast(request.payload);
  state.classes.apply_depth_update(msg.update, state.bags, msg.bitmap);
  state.last_broadcast = request.depth;
  state.depth = request.depth + 1;
  if (state.pruning) materialize(state);
  return reply(request, MsgKind::kAck);
}

Envelope SplitterService::enter_pruning(const Envelope& request, TreeState& state) {
  if (request.depth != state.depth) {
    throw Error(Errc::kProtocolDesync, "pruning switch for depth " +
                                           std::to_string(request.depth) +
                                           ", class list is at depth " +
                                           std::to_string(state.depth));
  }
  if (!state.pruning) {
    state.pruning = true;
    materialize(state);
  }
  return reply(request, MsgKind::kAck);
}

void SplitterService::materialize(TreeState& state) {
  const PreparedDataset& ds = *dataset_;
  const ClassList& cl = state.classes;
  auto keep = [&](SampleIndex i) { return state.bags[i] > 0 && cl.slot(i) != ClassList::kClosedSlot; };
  for (FeatureIndex j = 0; j < ds.m(); ++j) {
    if (!owned_[j]) continue;
    if (ds.specs[j].kind == ColumnKind::kNumerical) {
      std::vector<NumericalEntry> filtered;
      auto it = state.pruned.find(j);
      std::span<const NumericalEntry> source = ds.numerical(j).entries;
      if (it != state.pruned.end()) source = std::get<0>(it->second);
      for (const auto& e : source) {
        if (keep(e.sample)) filtered.push_back(e);
      }
      write_bytes_ += filtered.size() * sizeof(NumericalEntry);
      state.pruned[j] = std::move(filtered);
    } else {
      std::vector<IndexedCategoricalEntry> filtered;
      auto it = state.pruned.find(j);
      if (it != state.pruned.end()) {
        for (const auto& e : std::get<1>(it->second)) {
          if (keep(e.sample)) filtered.push_back(e);
        }
      } else {
        const auto& values = ds.categorical(j).values;
        for (SampleIndex i = 0; i < values.size(); ++i) {
          if (keep(i)) filtered.push_back({values[i].value, values[i].label, i});
        }
      }
      write_bytes_ += filtered.size() * sizeof(IndexedCategoricalEntry);
      state.pruned[j] = std::move(filtered);
    }
  }
}

SplitterStats SplitterService::stats() const {
  std::lock_guard lock(mu_);
  SplitterStats out;
  out.columns = retired_;
  for (const auto& [p, state] : trees_) {
    std::lock_guard tree_lock(state->mu);
    for (const auto& [j, c] : state->counters) out.columns.push_back(c);
  }
  std::sort(out.columns.begin(), out.columns.end(), [](const auto& a, const auto& b) {
    return std::tie(a.tree, a.feature) < std::tie(b.tree, b.feature);
  });
  out.write_bytes = write_bytes_;
  out.requests = requests_;
  out.duplicate_broadcasts = duplicate_broadcasts_;
  return out;
}

}  // namespace drf
