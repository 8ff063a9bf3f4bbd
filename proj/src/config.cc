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

#include "drf/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace drf {

std::string_view pruning_name(PruningMode m) {
  switch (m) {
    case PruningMode::kAuto: return "auto";
    case PruningMode::kOn: return "on";
    case PruningMode::kOff: return "off";
  }
  return "auto";
}

PruningMode parse_pruning(std::string_view name) {
  if (name == "auto") return PruningMode::kAuto;
  if (name == "on") return PruningMode::kOn;
  if (name == "off") return PruningMode::kOff;
  throw Error(Errc::kInvalidArgument, "pruning: expected auto|on|off, got '" + std::string(name) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_int(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(Errc::kInvalidArgument,
                std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw Error(Errc::kInvalidArgument,
              std::string(key) + ": expected a boolean, got '" + std::string(value) + "'");
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::kInvalidArgument, msg); };
  if (num_trees == 0) fail("num_trees must be >= 1");
  if (max_depth < -1) fail("max_depth must be >= -1");
  if (min_records == 0) fail("min_records must be >= 1");
  if (workers == 0) fail("workers must be >= 1");
  if (redundancy == 0 || redundancy > workers) fail("redundancy must be in [1, workers]");
  if (parallel_trees == 0) fail("parallel_trees must be >= 1");
  if (categorical_threads == 0) fail("categorical_threads must be >= 1");
}

void set_config_key(TrainConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "num_trees" || key == "trees") {
    cfg.num_trees = parse_int<std::uint32_t>(key, value);
  } else if (key == "m_prime") {
    cfg.m_prime = parse_int<std::uint32_t>(key, value);
  } else if (key == "max_depth") {
    cfg.max_depth = parse_int<std::int32_t>(key, value);
  } else if (key == "min_records") {
    cfg.min_records = parse_int<std::uint64_t>(key, value);
  } else if (key == "criterion") {
    cfg.criterion = parse_criterion(value);
  } else if (key == "usb") {
    cfg.usb = parse_bool(key, value);
  } else if (key == "redundancy") {
    cfg.redundancy = parse_int<std::uint32_t>(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_int<std::uint32_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "pruning") {
    cfg.pruning = parse_pruning(value);
  } else if (key == "parallel_trees") {
    cfg.parallel_trees = parse_int<std::uint32_t>(key, value);
  } else if (key == "categorical_threads") {
    cfg.categorical_threads = parse_int<std::uint32_t>(key, value);
  } else if (key == "classlist_chunk") {
    cfg.classlist_chunk = parse_int<std::uint64_t>(key, value);
  } else if (key == "oracle_cell_cap") {
    cfg.oracle_cell_cap = parse_int<std::uint64_t>(key, value);
  } else {
    throw Error(Errc::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
  }
}

TrainConfig parse_config(std::string_view text, TrainConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::kParseError, "config line " + std::to_string(line_no) + ": missing '='");
    }
    set_config_key(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoFailure, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string format_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "num_trees = " << cfg.num_trees << "\n"
      << "m_prime = " << cfg.m_prime << "\n"
      << "max_depth = " << cfg.max_depth << "\n"
      << "min_records = " << cfg.min_records << "\n"
      << "criterion = " << criterion_name(cfg.criterion) << "\n"
      << "usb = " << (cfg.usb ? "true" : "false") << "\n"
      << "redundancy = " << cfg.redundancy << "\n"
      << "workers = " << cfg.workers << "\n"
      << "seed = " << cfg.seed << "\n"
      << "pruning = " << pruning_name(cfg.pruning) << "\n"
      << "parallel_trees = " << cfg.parallel_trees << "\n"
      << "categorical_threads = " << cfg.categorical_threads << "\n"
      << "classlist_chunk = " << cfg.classlist_chunk << "\n"
      << "oracle_cell_cap = " << cfg.oracle_cell_cap << "\n";
  return out.str();
}

}  // namespace drf
