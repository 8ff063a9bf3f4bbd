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

#include <doctest.h>

#include <cmath>

#include "drf/config.h"
#include "drf/evaluation.h"
#include "drf/synth.h"
#include "test_util.h"

using namespace drf;
using drf::testing::error_of;
using drf::testing::sorted;
using drf::testing::train_inproc;

TEST_CASE("majority with one informative bit copies the bit") {
  SyntheticSpec spec;
  spec.family = Family::kMajority;
  spec.informative = 1;
  spec.useless = 3;
  spec.n = 500;
  const auto data = generate(spec);
  const auto bit = numerical_values(data.train, 0);
  for (SampleIndex i = 0; i < data.train.n(); ++i) CHECK(data.train.labels[i] == bit[i]);

  auto ds = sorted(data.train);
  TrainConfig cfg;
  cfg.num_trees = 1;
  cfg.max_depth = 1;
  cfg.m_prime = 4;
  const auto result = train_inproc(ds, cfg, 1);
  const auto& tree = result.forest.trees[0];
  CHECK(tree.depth() == 1);
  const FeatureTable rows(*ds);
  for (SampleIndex i = 0; i < ds->n(); ++i) {
    CHECK(tree.route(rows, i).distribution.argmax() == ds->labels[i]);
  }
}

TEST_CASE("xor bits carry no single-feature gain") {
  SyntheticSpec spec;
  spec.family = Family::kXor;
  spec.informative = 2;
  spec.useless = 1;
  spec.n = 20000;
  const auto data = generate(spec);
  for (FeatureIndex j = 0; j < 2; ++j) {
    const auto v = numerical_values(data.train, j);
    LabelHistogram parent(2), pos(2);
    for (SampleIndex i = 0; i < data.train.n(); ++i) {
      parent.add(data.train.labels[i], 1);
      if (v[i] <= 0.5) pos.add(data.train.labels[i], 1);
    }
    // Sampling noise of a 2x2 table at n = 2e4 is far below 1e-3.
    CHECK(split_score(parent, pos, Criterion::kGini) < 1e-3);
    CHECK(split_score(parent, pos, Criterion::kInfoGain) < 1e-3);
  }
  // The label is the parity of the bits.
  const auto a = numerical_values(data.train, 0);
  const auto b = numerical_values(data.train, 1);
  for (SampleIndex i = 0; i < 100; ++i) CHECK(data.train.labels[i] == ((a[i] != b[i]) ? 1u : 0u));
}

TEST_CASE("generation is deterministic and the test set is fresh") {
  SyntheticSpec spec;
  spec.family = Family::kNeedle;
  spec.informative = 6;
  spec.useless = 2;
  spec.n = 400;
  spec.seed = 11;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.train.labels == b.train.labels);
  CHECK(a.test.labels == b.test.labels);
  for (FeatureIndex j = 0; j < a.train.m(); ++j) {
    CHECK(numerical_values(a.train, j) == numerical_values(b.train, j));
  }
  CHECK(a.test.n() == 100);
  CHECK(numerical_values(a.train, 7) != numerical_values(a.test, 7));
  spec.seed = 12;
  CHECK(numerical_values(generate(spec).train, 7) != numerical_values(a.train, 7));
}

TEST_CASE("needle threshold and rate") {
  // Binomial(6, 1/2) tail: P(>=5) = 7/64, P(>=6) = 1/64.
  CHECK(needle_threshold(6, 0.05) == 6);
  CHECK(needle_threshold(6, 0.12) == 5);
  CHECK(needle_threshold(10, 0.5) == 6);
  SyntheticSpec spec;
  spec.family = Family::kNeedle;
  spec.informative = 10;
  spec.n = 50000;
  spec.positive_rate = 0.06;
  const auto data = generate(spec);
  double pos = 0;
  for (auto y : data.train.labels) pos += y;
  // P(Binomial(10, 1/2) >= 8) = 56/1024.
  CHECK(std::abs(pos / spec.n - 56.0 / 1024) < 0.005);
}

TEST_CASE("family names") {
  CHECK(parse_family("xor") == Family::kXor);
  CHECK(parse_family("majority") == Family::kMajority);
  CHECK(parse_family("needle") == Family::kNeedle);
  CHECK(family_name(Family::kXor) == "xor");
  CHECK(error_of([] { parse_family("spiral"); }) == Errc::kInvalidArgument);
}

TEST_CASE("random corpus datasets respect their shape") {
  const CorpusShape shape;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto ds = random_dataset(seed, shape);
    CHECK(ds.n() >= shape.min_n);
    CHECK(ds.n() <= shape.max_n);
    CHECK(ds.m() >= 2);
    CHECK(ds.m() <= shape.max_m);
    CHECK(ds.num_classes() >= 2);
    CHECK(ds.num_classes() <= 4);
    for (const auto& spec : ds.specs) {
      if (spec.kind == ColumnKind::kCategorical) {
        CHECK(*spec.arity() >= 2);
        CHECK(*spec.arity() <= 8);
      }
    }
  }
}

TEST_CASE("config text and validation") {
  const TrainConfig cfg = parse_config(
      "# forest\nnum_trees = 7\nmax_depth=-1\nmin_records = 3\ncriterion = infogain\n"
      "usb = true\nredundancy = 2\nworkers = 4\nseed = 99\npruning = on\n");
  CHECK(cfg.num_trees == 7);
  CHECK(cfg.max_depth == -1);
  CHECK(cfg.min_records == 3);
  CHECK(cfg.criterion == Criterion::kInfoGain);
  CHECK(cfg.usb);
  CHECK(cfg.redundancy == 2);
  CHECK(cfg.seed == 99);
  CHECK(cfg.pruning == PruningMode::kOn);
  CHECK(parse_config(format_config(cfg)) == cfg);

  TrainConfig bad;
  bad.redundancy = 3;
  bad.workers = 2;
  auto message = [](const TrainConfig& c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(bad).find("redundancy") != std::string::npos);
  bad = TrainConfig{};
  bad.min_records = 0;
  CHECK(message(bad).find("min_records") != std::string::npos);
  CHECK(error_of([] { parse_config("depth_of_tree = 3\n"); }) == Errc::kInvalidArgument);
  CHECK(error_of([] { parse_config("num_trees = many\n"); }) == Errc::kInvalidArgument);
  CHECK(parse_pruning("auto") == PruningMode::kAuto);
  CHECK(pruning_name(PruningMode::kOff) == "off");
}

TEST_CASE("more trees do not lower the out-of-bag auc on majority data") {
  double previous = 0.0;
  for (std::uint32_t trees : {1u, 3u, 10u}) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SyntheticSpec spec;
      spec.family = Family::kMajority;
      spec.n = 2000;
      spec.informative = 5;
      spec.useless = 5;
      spec.seed = seed;
      auto ds = sorted(generate(spec).train);
      TrainConfig cfg;
      cfg.num_trees = trees;
      cfg.seed = seed;
      const auto result = train_inproc(ds, cfg, 2);
      sum += oob_evaluate(result.forest, *ds, result.seed).auc;
    }
    CHECK(sum / 3 >= previous);
    previous = sum / 3;
  }
}
