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

// Command-line driver: dataset preparation, synthetic data, training,
// evaluation, statistics, engine-vs-reference verification and benchmarks.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "drf/config.h"
#include "drf/dataset.h"
#include "drf/evaluation.h"
#include "drf/manager.h"
#include "drf/oracle.h"
#include "drf/splitter.h"
#include "drf/synth.h"
#include "drf/transport.h"

namespace {

using namespace drf;

// Rewrites "Code: key ..." with the flag spelling of the key.
std::string flag_message(const std::string& what) {
  static const std::pair<const char*, const char*> kFlags[] = {
      {"num_trees", "--trees"},         {"max_depth", "--max-depth"},
      {"min_records", "--min-records"}, {"m_prime", "--m-prime"},
      {"redundancy", "--redundancy"},   {"workers", "--workers"},
      {"parallel_trees", "--parallel-trees"}};
  std::string text = what.substr(what.find(": ") == std::string::npos ? 0 : what.find(": ") + 2);
  for (const auto& [key, flag] : kFlags) {
    if (text.rfind(key, 0) == 0) return std::string(flag) + text.substr(std::strlen(key));
  }
  return text;
}

struct TrainFlags {
  std::string config;
  std::string trees, max_depth, min_records, criterion, redundancy, seed, pruning, m_prime;
  bool usb = false;
  std::string workers = "inproc:1";
  std::uint32_t parallel_trees = 0;

  void add(CLI::App* app) {
    app->add_option("--config", config, "key=value config file");
    app->add_option("--trees", trees, "number of trees");
    app->add_option("--max-depth", max_depth, "maximum depth, -1 for unlimited");
    app->add_option("--min-records", min_records, "minimum bag-weighted records per branch");
    app->add_option("--criterion", criterion, "gini or infogain");
    app->add_option("--m-prime", m_prime, "candidate features per node, 0 for ceil(sqrt(m))");
    app->add_flag("--usb", usb, "one candidate set per depth");
    app->add_option("--redundancy", redundancy, "replicas per feature");
    app->add_option("--workers", workers, "inproc:N, N, host:port list or roster file");
    app->add_option("--seed", seed, "forest seed");
    app->add_option("--pruning", pruning, "auto, on or off");
    app->add_option("--parallel-trees", parallel_trees, "trees built concurrently");
  }

  Roster roster() const {
    const bool digits = !workers.empty() &&
                        workers.find_first_not_of("0123456789") == std::string::npos;
    return parse_roster(digits ? "inproc:" + workers : workers);
  }

  TrainConfig build() const {
    TrainConfig cfg = config.empty() ? TrainConfig{} : load_config(config);
    auto set = [&](const char* flag, const char* key, const std::string& value) {
      if (value.empty()) return;
      try {
        set_config_key(cfg, key, value);
      } catch (const Error& e) {
        const std::string what = e.what();
        const auto colon = what.find(": ");
        throw Error(e.code(), std::string(flag) + ": " +
                                  (colon == std::string::npos ? what : what.substr(colon + 2)));
      }
    };
    set("--trees", "num_trees", trees);
    set("--max-depth", "max_depth", max_depth);
    set("--min-records", "min_records", min_records);
    set("--criterion", "criterion", criterion);
    set("--m-prime", "m_prime", m_prime);
    set("--redundancy", "redundancy", redundancy);
    set("--seed", "seed", seed);
    set("--pruning", "pruning", pruning);
    if (usb) cfg.usb = true;
    if (parallel_trees != 0) cfg.parallel_trees = parallel_trees;
    cfg.workers = roster().size();
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw Error(e.code(), flag_message(e.what()));
    }
    return cfg;
  }
};

std::shared_ptr<const PreparedDataset> load_sorted(const std::string& dir) {
  PreparedDataset ds = load_dataset(dir);
  if (!ds.is_sorted()) ds = presort(std::move(ds), std::size_t{1} << 24);
  return std::make_shared<const PreparedDataset>(std::move(ds));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoFailure, "cannot write " + path);
  out << text;
}

void write_depth_stats_csv(const TrainResult& result, std::ostream& out) {
  out << "tree,depth,open_leaves,open_fraction,mean_closed_depth,max_worker_features,"
         "drawn_features,bagged_open_samples,pruning,seconds\n";
  for (const auto& tree : result.forest.trees) {
    for (const auto& s : tree.depth_stats) {
      out << tree.index << ',' << s.depth << ',' << s.open_leaves << ',' << s.open_fraction << ','
          << s.mean_closed_depth << ',' << s.max_worker_features << ',' << s.drawn_features << ','
          << s.bagged_open_samples << ',' << (s.pruning ? 1 : 0) << ',' << s.seconds << '\n';
    }
  }
}

// Forest seed recorded by `train` next to the forest file.
std::optional<std::uint64_t> manifest_seed(const std::string& forest_path) {
  std::ifstream in(forest_path + ".manifest.json");
  if (!in) return std::nullopt;
  const auto j = nlohmann::json::parse(in);
  return std::stoull(j.at("seed_context").at("forest_seed").get<std::string>());
}

int cmd_prepare(const std::string& csv, const std::string& label, const std::string& out,
                std::size_t budget, std::size_t shards) {
  const RawRows rows = read_csv(csv, label);
  PreparedDataset ds = ingest(rows, infer_specs(rows), infer_class_names(rows), IngestMode::kStrict, shards);
  PresortStats stats;
  ds = presort(std::move(ds), budget, &stats);
  save_dataset(ds, out);
  std::cout << "prepared " << ds.n() << " rows, " << ds.m() << " columns, " << ds.num_classes()
            << " classes; merge passes " << stats.merge_passes << "\n";
  return 0;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out, std::string test_out) {
  const SyntheticData data = generate(spec);
  if (test_out.empty()) test_out = out + "_test";
  save_dataset(data.train, out);
  save_dataset(data.test, test_out);
  nlohmann::ordered_json j;
  j["family"] = family_name(spec.family);
  j["n"] = spec.n;
  j["informative"] = spec.informative;
  j["useless"] = spec.useless;
  j["seed"] = std::to_string(spec.seed);
  j["positive_rate"] = spec.positive_rate;
  j["test_n"] = data.test.n();
  write_text(out + "/generator.json", j.dump(2) + "\n");
  std::cout << "wrote " << data.train.n() << " training rows to " << out << " and "
            << data.test.n() << " test rows to " << test_out << "\n";
  return 0;
}

int cmd_train(const std::string& dataset, const std::string& out, const TrainFlags& flags,
              std::string depth_csv, std::uint32_t drop_every) {
  const TrainConfig cfg = flags.build();
  auto ds = load_sorted(dataset);
  TrainOptions options;
  options.drop_every = drop_every;
  const TrainResult result = train_forest(ds, cfg, flags.roster(), options);
  save_forest(result.forest, out);
  if (depth_csv.empty()) depth_csv = out + ".depth_stats.csv";
  std::ofstream csv(depth_csv);
  if (!csv) throw Error(Errc::kIoFailure, "cannot write " + depth_csv);
  write_depth_stats_csv(result, csv);
  write_text(out + ".manifest.json", run_manifest_json(result, cfg, dataset) + "\n");
  std::cout << "trained " << result.forest.trees.size() << " trees on " << result.workers
            << " splitters in " << result.seconds << " s\n";
  return 0;
}

int cmd_eval(const std::string& forest_path, const std::string& dataset, const std::string& test,
             const std::string& format, const std::string& out, std::string seed_text,
             std::size_t evaluators) {
  const Forest forest = load_forest(forest_path);
  EvalReport report;
  if (!test.empty()) {
    report = holdout_evaluate(forest, load_dataset(test));
  } else {
    if (dataset.empty()) throw Error(Errc::kInvalidArgument, "--dataset or --test is required");
    std::uint64_t seed = 1;
    if (!seed_text.empty()) {
      seed = std::stoull(seed_text);
    } else if (auto recorded = manifest_seed(forest_path)) {
      seed = *recorded;
    }
    report = oob_evaluate(forest, load_dataset(dataset), SeedContext::make(seed), evaluators);
  }
  std::ostringstream text;
  if (format == "json") {
    text << report_json(report) << "\n";
  } else if (format == "csv") {
    write_report_csv(report, text);
  } else {
    throw Error(Errc::kInvalidArgument, "--format must be csv or json");
  }
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out, text.str());
  }
  return 0;
}

int cmd_stats(const std::string& forest_path, const std::string& out) {
  const Forest forest = load_forest(forest_path);
  std::ostringstream text;
  text.precision(17);
  text << "tree,depth,node_density,sample_density\n";
  std::vector<double> node_sum, sample_sum;
  std::vector<std::uint32_t> count;
  for (const auto& tree : forest.trees) {
    const TreeDensity d = tree_stats(tree);
    const std::size_t depths = std::max(d.node_density.size(), d.sample_density.size());
    if (node_sum.size() < depths) {
      node_sum.resize(depths);
      sample_sum.resize(depths);
      count.resize(depths);
    }
    for (std::size_t i = 0; i < depths; ++i) {
      const double nd = i < d.node_density.size() ? d.node_density[i] : 0.0;
      const double sd = i < d.sample_density.size() ? d.sample_density[i] : 0.0;
      text << tree.index << ',' << i << ',' << nd << ',' << sd << '\n';
      node_sum[i] += nd;
      sample_sum[i] += sd;
      ++count[i];
    }
  }
  for (std::size_t i = 0; i < node_sum.size(); ++i) {
    text << "mean," << i << ',' << node_sum[i] / count[i] << ',' << sample_sum[i] / count[i] << '\n';
  }
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out, text.str());
  }
  return 0;
}

// Engine and reference forests over one dataset; returns identical trees.
std::size_t verify_one(std::shared_ptr<const PreparedDataset> ds, const TrainConfig& cfg,
                       const Roster& roster, std::size_t& total) {
  const TrainResult engine = train_forest(ds, cfg, roster);
  const Forest reference = train_reference_forest(*ds, cfg, SeedContext::make(cfg.seed));
  std::size_t same = 0;
  for (std::size_t t = 0; t < reference.trees.size(); ++t) {
    ++total;
    const auto cmp = t < engine.forest.trees.size()
                         ? trees_equal(engine.forest.trees[t], reference.trees[t])
                         : ForestComparison{false, "missing tree"};
    if (cmp.equal) {
      ++same;
    } else {
      std::cerr << "tree " << t << " differs: " << cmp.divergence << "\n";
    }
  }
  return same;
}

int cmd_verify(const std::string& dataset, std::uint64_t corpus, const TrainFlags& flags) {
  const TrainConfig base = flags.build();
  std::size_t total = 0;
  std::size_t same = 0;
  if (!dataset.empty()) {
    same += verify_one(load_sorted(dataset), base, flags.roster(), total);
  } else {
    if (corpus == 0) throw Error(Errc::kInvalidArgument, "--dataset or --corpus is required");
    for (std::uint64_t s = 1; s <= corpus; ++s) {
      auto ds = std::make_shared<const PreparedDataset>(
          presort(random_dataset(s), std::size_t{1} << 20));
      TrainConfig cfg = base;
      cfg.seed = base.seed + s;
      same += verify_one(ds, cfg, flags.roster(), total);
    }
  }
  std::cout << same << "/" << total << " trees identical\n";
  return same == total ? 0 : 1;
}

int cmd_bench(Family family, const std::vector<std::uint64_t>& sizes, std::uint32_t informative,
              std::uint32_t useless, std::uint64_t seed, const TrainFlags& flags,
              const std::string& out) {
  const TrainConfig cfg = flags.build();
  std::ostringstream text;
  text.precision(17);
  text << "n,seconds,auc\n";
  for (std::uint64_t n : sizes) {
    SyntheticSpec spec;
    spec.family = family;
    spec.n = n;
    spec.informative = informative;
    spec.useless = useless;
    spec.seed = seed;
    const SyntheticData data = generate(spec);
    const auto start = std::chrono::steady_clock::now();
    auto ds = std::make_shared<const PreparedDataset>(presort(data.train, std::size_t{1} << 24));
    const TrainResult result = train_forest(ds, cfg, flags.roster());
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const EvalReport report = holdout_evaluate(result.forest, data.test);
    text << n << ',' << seconds << ',' << report.auc << '\n';
  }
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out, text.str());
  }
  return 0;
}

int cmd_importance(const std::string& forest_path, const std::string& dataset,
                   const std::string& method, std::uint64_t seed) {
  const Forest forest = load_forest(forest_path);
  const PreparedDataset ds = load_dataset(dataset);
  ImportanceMethod m;
  if (method == "gain") {
    m = ImportanceMethod::kSplitGain;
  } else if (method == "permutation") {
    m = ImportanceMethod::kOobPermutation;
  } else {
    throw Error(Errc::kInvalidArgument, "--method must be gain or permutation");
  }
  const std::uint64_t forest_seed = manifest_seed(forest_path).value_or(1);
  const auto importance = feature_importance(forest, ds, SeedContext::make(forest_seed), m, seed);
  std::cout << "feature,importance\n";
  for (std::size_t j = 0; j < importance.size(); ++j) {
    std::cout << ds.specs[j].name << ',' << importance[j] << '\n';
  }
  return 0;
}

int cmd_dump(const std::string& forest_path) {
  const Forest forest = load_forest(forest_path);
  for (const auto& tree : forest.trees) {
    std::cout << "tree " << tree.index << "\n";
    dump_tree(tree, std::cout);
  }
  return 0;
}

int cmd_worker(const std::string& dataset, std::uint16_t port, const std::string& bind) {
  auto ds = load_sorted(dataset);
  SplitterService service(ds);
  SocketServer server(service, port, bind);
  std::cout << "splitter listening on " << bind << ":" << server.port() << std::endl;
  server.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed exact random forest trainer"};
  app.require_subcommand(1);

  std::string csv, label = "label", out, dataset, test, forest, format = "csv", test_out, depth_csv;
  std::size_t budget = std::size_t{1} << 24, shards = 1, evaluators = 1;
  std::uint32_t drop_every = 0;
  std::string eval_seed;
  std::uint64_t corpus = 0;

  auto* prepare = app.add_subcommand("prepare", "CSV to presorted binary columns");
  prepare->add_option("--csv", csv, "input CSV with a header row")->required();
  prepare->add_option("--label", label, "label column name");
  prepare->add_option("--out", out, "output directory")->required();
  prepare->add_option("--memory-budget", budget, "entries resident per sort run");
  prepare->add_option("--shards", shards, "record shards");

  SyntheticSpec spec;
  std::string family = "majority";
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--family", family, "xor, majority or needle");
  synth->add_option("--n", spec.n, "training rows");
  synth->add_option("--informative", spec.informative, "informative bits");
  synth->add_option("--useless", spec.useless, "useless uniform columns");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--positive-rate", spec.positive_rate, "needle positive rate");
  synth->add_option("--test-n", spec.test_n, "held-out rows, 0 for n/4");
  synth->add_option("--out", out, "training dataset directory")->required();
  synth->add_option("--test-out", test_out, "test dataset directory");

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "train a forest");
  train->add_option("--dataset", dataset, "prepared dataset directory")->required();
  train->add_option("--out", out, "forest file")->required();
  train->add_option("--depth-stats", depth_csv, "per-depth statistics CSV");
  train->add_option("--drop-every", drop_every, "drop every k-th splitter reply (testing)");
  train_flags.add(train);

  auto* eval = app.add_subcommand("eval", "evaluate a forest, out-of-bag or held-out");
  eval->add_option("--forest", forest, "forest file")->required();
  eval->add_option("--dataset", dataset, "training dataset for out-of-bag scoring");
  eval->add_option("--test", test, "held-out dataset");
  eval->add_option("--format", format, "csv or json");
  eval->add_option("--out", out, "report file, stdout when empty");
  eval->add_option("--seed", eval_seed, "forest seed, read from the run manifest when omitted");
  eval->add_option("--evaluators", evaluators, "row shards scored in parallel");

  auto* stats = app.add_subcommand("stats", "node and sample density per depth");
  stats->add_option("--forest", forest, "forest file")->required();
  stats->add_option("--out", out, "CSV file, stdout when empty");

  TrainFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "compare the engine with the reference trainer");
  verify->add_option("--dataset", dataset, "prepared dataset directory");
  verify->add_option("--corpus", corpus, "number of random corpus datasets instead");
  verify_flags.add(verify);

  TrainFlags bench_flags;
  std::string bench_family = "xor", sizes_text = "1000,10000,100000";
  std::uint32_t bench_informative = 2, bench_useless = 2;
  std::uint64_t bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "training time and AUC against size");
  bench->add_option("--family", bench_family, "xor, majority or needle");
  bench->add_option("--sizes", sizes_text, "comma-separated training sizes");
  bench->add_option("--informative", bench_informative, "informative bits");
  bench->add_option("--useless", bench_useless, "useless columns");
  bench->add_option("--data-seed", bench_seed, "generator seed");
  bench->add_option("--out", out, "CSV file, stdout when empty");
  bench_flags.add(bench);

  std::string method = "gain";
  std::uint64_t importance_seed = 1;
  auto* importance = app.add_subcommand("importance", "feature importance");
  importance->add_option("--forest", forest, "forest file")->required();
  importance->add_option("--dataset", dataset, "training dataset")->required();
  importance->add_option("--method", method, "gain or permutation");
  importance->add_option("--seed", importance_seed, "permutation seed");

  auto* dump = app.add_subcommand("dump", "print every node with exact thresholds");
  dump->add_option("--forest", forest, "forest file")->required();

  std::uint16_t port = 0;
  std::string bind = "127.0.0.1";
  auto* worker = app.add_subcommand("worker", "serve a splitter over TCP");
  worker->add_option("--dataset", dataset, "prepared dataset directory")->required();
  worker->add_option("--port", port, "listen port, 0 for any");
  worker->add_option("--bind", bind, "listen address");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) return cmd_prepare(csv, label, out, budget, shards);
    if (*synth) {
      spec.family = parse_family(family);
      return cmd_synth(spec, out, test_out);
    }
    if (*train) return cmd_train(dataset, out, train_flags, depth_csv, drop_every);
    if (*eval) return cmd_eval(forest, dataset, test, format, out, eval_seed, evaluators);
    if (*stats) return cmd_stats(forest, out);
    if (*verify) return cmd_verify(dataset, corpus, verify_flags);
    if (*bench) {
      std::vector<std::uint64_t> sizes;
      std::stringstream in(sizes_text);
      for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) sizes.push_back(std::stoull(item));
      }
      return cmd_bench(parse_family(bench_family), sizes, bench_informative, bench_useless,
                       bench_seed, bench_flags, out);
    }
    if (*importance) return cmd_importance(forest, dataset, method, importance_seed);
    if (*dump) return cmd_dump(forest);
    if (*worker) return cmd_worker(dataset, port, bind);
  } catch (const drf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
