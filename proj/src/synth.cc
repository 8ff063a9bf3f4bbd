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

#include "drf/synth.h"

#include <cmath>

#include "drf/seeding.h"

namespace drf {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kXor: return "xor";
    case Family::kMajority: return "majority";
    case Family::kNeedle: return "needle";
  }
  return "majority";
}

Family parse_family(std::string_view name) {
  if (name == "xor") return Family::kXor;
  if (name == "majority") return Family::kMajority;
  if (name == "needle") return Family::kNeedle;
  throw Error(Errc::kInvalidArgument, "family: expected xor|majority|needle, got '" + std::string(name) + "'");
}

std::uint32_t needle_threshold(std::uint32_t informative, double positive_rate) {
  // Tail P(X >= t) for X ~ Binomial(k, 1/2), scanned from the top.
  const std::uint32_t k = informative;
  double tail = 0.0;
  std::uint32_t t = k + 1;
  for (std::uint32_t c = k + 1; c-- > 0;) {
    const double p = std::exp(std::lgamma(k + 1.0) - std::lgamma(c + 1.0) - std::lgamma(k - c + 1.0) -
                              k * std::log(2.0));
    if (tail + p > positive_rate) break;
    tail += p;
    t = c;
  }
  // Keep at least one positive configuration.
  return std::min(t, k);
}

namespace {

PreparedDataset make_rows(const SyntheticSpec& spec, std::uint64_t rows, std::uint64_t stream) {
  SplitMixRng rng(splitmix64(spec.seed) ^ splitmix64(stream));
  const std::uint32_t m = spec.informative + spec.useless;
  const std::uint32_t threshold = needle_threshold(spec.informative, spec.positive_rate);
  std::vector<std::vector<double>> columns(m, std::vector<double>(rows));
  std::vector<ClassId> labels(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    std::uint32_t ones = 0;
    for (std::uint32_t j = 0; j < spec.informative; ++j) {
      const std::uint32_t bit = static_cast<std::uint32_t>(rng.next() >> 63);
      columns[j][i] = bit;
      ones += bit;
    }
    for (std::uint32_t j = spec.informative; j < m; ++j) columns[j][i] = rng.uniform();
    switch (spec.family) {
      case Family::kXor: labels[i] = ones & 1; break;
      case Family::kMajority: labels[i] = 2 * ones >= spec.informative ? 1 : 0; break;
      case Family::kNeedle: labels[i] = ones >= threshold ? 1 : 0; break;
    }
  }
  std::vector<ColumnSpec> specs;
  std::vector<ColumnValues> values;
  for (std::uint32_t j = 0; j < m; ++j) {
    ColumnSpec s;
    s.name = j < spec.informative ? "bit" + std::to_string(j) : "uv" + std::to_string(j - spec.informative);
    s.kind = ColumnKind::kNumerical;
    s.column_index = j;
    specs.push_back(std::move(s));
    values.emplace_back(std::move(columns[j]));
  }
  return from_columns(std::move(specs), std::move(values), std::move(labels), {"0", "1"});
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.informative == 0) throw Error(Errc::kInvalidArgument, "informative must be >= 1");
  if (spec.family == Family::kNeedle && !(spec.positive_rate > 0.0 && spec.positive_rate < 1.0)) {
    throw Error(Errc::kInvalidArgument, "positive_rate must be in (0, 1)");
  }
  SyntheticData out;
  out.train = make_rows(spec, spec.n, 0x7261696E);
  out.test = make_rows(spec, spec.test_n == 0 ? spec.n / 4 : spec.test_n, 0x74657374);
  return out;
}

PreparedDataset random_dataset(std::uint64_t seed, const CorpusShape& shape) {
  SplitMixRng rng(splitmix64(seed ^ 0xC0DEC0DE12345678ull));
  const std::uint64_t n = shape.min_n + rng.below(shape.max_n - shape.min_n + 1);
  const auto m = static_cast<std::uint32_t>(2 + rng.below(shape.max_m - 1));
  const auto classes = static_cast<std::uint32_t>(2 + rng.below(3));
  std::vector<ColumnSpec> specs(m);
  std::vector<ColumnValues> values;
  // Per-column contribution to a latent class score.
  std::vector<std::vector<double>> latent(classes, std::vector<double>(n, 0.0));
  for (std::uint32_t j = 0; j < m; ++j) {
    specs[j].name = "c" + std::to_string(j);
    specs[j].column_index = j;
    const std::uint64_t kind = rng.below(3);
    const bool informative = rng.below(3) != 0;
    const auto target = static_cast<ClassId>(rng.below(classes));
    if (kind == 2) {
      const auto arity = static_cast<std::uint32_t>(2 + rng.below(7));
      specs[j].kind = ColumnKind::kCategorical;
      for (std::uint32_t v = 0; v < arity; ++v) specs[j].dictionary.push_back("v" + std::to_string(v));
      std::vector<double> effect(arity);
      for (auto& e : effect) e = rng.uniform() * 2.0 - 1.0;
      std::vector<std::uint32_t> col(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        col[i] = static_cast<std::uint32_t>(rng.below(arity));
        if (informative) latent[target][i] += effect[col[i]];
      }
      values.emplace_back(std::move(col));
    } else {
      specs[j].kind = ColumnKind::kNumerical;
      // Integer-valued columns produce long runs of ties.
      const std::uint64_t levels = kind == 1 ? 2 + rng.below(10) : 0;
      const double cut = rng.uniform();
      std::vector<double> col(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        col[i] = levels ? static_cast<double>(rng.below(levels)) : u * 100.0 - 50.0;
        const double x = levels ? col[i] / static_cast<double>(levels) : u;
        if (informative) latent[target][i] += x > cut ? 1.0 : -0.5;
      }
      values.emplace_back(std::move(col));
    }
  }
  std::vector<ClassId> labels(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (rng.below(5) == 0) {
      labels[i] = static_cast<ClassId>(rng.below(classes));
      continue;
    }
    ClassId best = 0;
    for (ClassId c = 1; c < classes; ++c) {
      if (latent[c][i] > latent[best][i]) best = c;
    }
    labels[i] = best;
  }
  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < classes; ++c) names.push_back("k" + std::to_string(c));
  return from_columns(std::move(specs), std::move(values), std::move(labels), std::move(names),
                      1 + rng.below(4));
}

}  // namespace drf
