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

#include "drf/manager.h"

#include <atomic>
#include <cctype>
#include <chrono>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "drf/splitter.h"

namespace drf {

Endpoint parse_endpoint(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::kParseError, "expected host:port, got '" + std::string(text) + "'");
  }
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value == 0 || value > 65535) {
    throw Error(Errc::kParseError, "bad port in '" + std::string(text) + "'");
  }
  e.port = static_cast<std::uint16_t>(value);
  return e;
}

Roster parse_roster(const std::string& spec) {
  Roster roster;
  if (spec.rfind("inproc:", 0) == 0) {
    const std::string count = spec.substr(7);
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), roster.inproc);
    if (ec != std::errc() || ptr != count.data() + count.size() || roster.inproc == 0) {
      throw Error(Errc::kInvalidArgument, "workers: bad in-process count '" + count + "'");
    }
    return roster;
  }
  std::vector<std::string> items;
  if (std::filesystem::is_regular_file(spec)) {
    std::ifstream in(spec);
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
      std::size_t start = 0;
      while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
      if (start < line.size()) items.push_back(line.substr(start));
    }
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      const std::size_t comma = spec.find(',', start);
      const std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!item.empty()) items.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (const auto& item : items) roster.endpoints.push_back(parse_endpoint(item));
  if (roster.endpoints.empty()) {
    throw Error(Errc::kInvalidArgument, "workers: empty roster '" + spec + "'");
  }
  return roster;
}

TrainResult train_forest(const PreparedDataset& ds, const TrainConfig& cfg_in,
                         const std::vector<Channel*>& splitters, const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig cfg = cfg_in;
  cfg.workers = static_cast<std::uint32_t>(splitters.size());
  cfg.validate();
  if (ds.m() == 0) throw Error(Errc::kInvalidArgument, "dataset has no feature columns");
  if (ds.num_classes() == 0) throw Error(Errc::kInvalidArgument, "dataset has no classes");

  TrainResult result;
  result.workers = cfg.workers;
  result.seed = SeedContext::make(cfg.seed);
  result.allocation = allocate(static_cast<std::uint32_t>(ds.m()), cfg.workers, cfg.redundancy, cfg.seed);

  std::vector<std::unique_ptr<FlakyChannel>> flaky;
  std::vector<Channel*> channels = splitters;
  if (options.drop_every != 0) {
    for (auto& c : channels) {
      flaky.push_back(std::make_unique<FlakyChannel>(*c, options.drop_every));
      c = flaky.back().get();
    }
  }
  SplitterPool pool(channels, options.retry);

  for (WorkerId w = 0; w < channels.size(); ++w) {
    ConfigureMsg msg;
    msg.seed = result.seed;
    msg.n = ds.n();
    msg.m = static_cast<std::uint32_t>(ds.m());
    msg.num_classes = ds.num_classes();
    msg.criterion = cfg.criterion;
    msg.min_records = cfg.min_records;
    msg.plan = cfg.plan();
    msg.owned = result.allocation.owned_by(w);
    msg.categorical_threads = cfg.categorical_threads;
    msg.classlist_chunk = cfg.classlist_chunk;
    Envelope e;
    e.kind = MsgKind::kConfigure;
    e.payload = encode_payload(msg);
    try {
      roundtrip(*channels[w], e, MsgKind::kAck, options.retry);
    } catch (const Error& err) {
      if (err.code() != Errc::kSplitterUnreachable || cfg.redundancy < 2) throw;
      pool.mark_dead(w);
    }
  }

  BuildContext ctx;
  ctx.cfg = cfg;
  ctx.seed = result.seed;
  ctx.n = ds.n();
  ctx.m = static_cast<std::uint32_t>(ds.m());
  ctx.num_classes = ds.num_classes();
  ctx.allocation = result.allocation;
  ctx.splitters = &pool;

  result.forest.num_classes = ds.num_classes();
  for (const auto& s : ds.specs) result.forest.kinds.push_back(s.kind);
  result.forest.trees.resize(cfg.num_trees);
  result.metrics.resize(cfg.num_trees);

  // Tree builders run as in-process services; the manager dispatches the
  // tree jobs to them with bounded parallelism.
  std::atomic<std::uint32_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto builder_loop = [&] {
    TreeBuilderService service(ctx);
    InProcessChannel channel(service, "tree-builder");
    for (;;) {
      const std::uint32_t p = next++;
      if (p >= cfg.num_trees || failed) return;
      try {
        Envelope e;
        e.kind = MsgKind::kRequestTree;
        e.tree = p;
        Envelope reply = roundtrip(channel, e, MsgKind::kTree, RetryPolicy{1, {}, 1.0});
        ByteReader r(reply.payload);
        result.forest.trees[p] = decode_tree(r);
        result.metrics[p] = decode_metrics(r);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  const std::uint32_t threads = std::min(cfg.parallel_trees, cfg.num_trees);
  if (threads <= 1) {
    builder_loop();
  } else {
    std::vector<std::thread> pool_threads;
    for (std::uint32_t t = 0; t < threads; ++t) pool_threads.emplace_back(builder_loop);
    for (auto& t : pool_threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  const auto live = pool.live();
  for (WorkerId w = 0; w < channels.size(); ++w) {
    SplitterStats stats;
    if (live[w]) {
      Envelope e;
      e.kind = MsgKind::kRequestStats;
      try {
        stats = decode_stats(roundtrip(*channels[w], e, MsgKind::kStats, options.retry).payload);
      } catch (const Error& err) {
        if (err.code() != Errc::kSplitterUnreachable) throw;
      }
    }
    result.splitter_stats.push_back(std::move(stats));
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

TrainResult train_forest(std::shared_ptr<const PreparedDataset> ds, const TrainConfig& cfg,
                         const Roster& roster, const TrainOptions& options) {
  std::vector<std::unique_ptr<Service>> services;
  std::vector<std::unique_ptr<Channel>> owned;
  std::vector<Channel*> channels;
  if (roster.inproc != 0) {
    for (std::uint32_t w = 0; w < roster.inproc; ++w) {
      services.push_back(std::make_unique<SplitterService>(ds));
      owned.push_back(std::make_unique<InProcessChannel>(*services.back(),
                                                         "splitter-" + std::to_string(w)));
    }
  } else {
    for (const auto& e : roster.endpoints) {
      owned.push_back(std::make_unique<SocketChannel>(e.host, e.port));
    }
  }
  for (auto& c : owned) channels.push_back(c.get());
  return train_forest(*ds, cfg, channels, options);
}

std::string run_manifest_json(const TrainResult& result, const TrainConfig& cfg,
                              const std::string& dataset_ref) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["dataset"] = dataset_ref;
  const SeedContext& s = result.seed;
  j["seed_context"] = {{"version", SeedContext::kVersion},
                       {"forest_seed", std::to_string(s.forest_seed)},
                       {"a", std::to_string(s.a)},
                       {"b", std::to_string(s.b)},
                       {"modulus", std::to_string(s.modulus)},
                       {"steps", s.steps},
                       {"bag_law", "poisson1_truncated"},
                       {"bag_max", kBagMax}};
  j["config"] = {{"num_trees", cfg.num_trees},
                 {"m_prime", cfg.m_prime},
                 {"max_depth", cfg.max_depth},
                 {"min_records", cfg.min_records},
                 {"criterion", criterion_name(cfg.criterion)},
                 {"usb", cfg.usb},
                 {"redundancy", cfg.redundancy},
                 {"workers", result.workers},
                 {"seed", std::to_string(cfg.seed)},
                 {"pruning", pruning_name(cfg.pruning)},
                 {"parallel_trees", cfg.parallel_trees},
                 {"categorical_threads", cfg.categorical_threads},
                 {"classlist_chunk", cfg.classlist_chunk}};
  j["allocation"] = result.allocation.placement;
  j["trees"] = result.forest.trees.size();
  j["seconds"] = result.seconds;
  return j.dump(2);
}

}  // namespace drf
