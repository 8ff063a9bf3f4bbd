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

#ifndef DRF_PROTOCOL_H_
#define DRF_PROTOCOL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drf/bitmap.h"
#include "drf/bytes.h"
#include "drf/classlist.h"
#include "drf/seeding.h"
#include "drf/split.h"

namespace drf {

inline constexpr std::uint32_t kFrameMagic = 0x57465244;  // "DRFW" on the wire.
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 4 + 2 + 8;

enum class MsgKind : std::uint8_t {
  // Requests.
  kConfigure = 1,
  kBeginTree = 2,
  kRequestSupersplit = 3,
  kEvaluateConditions = 4,
  kBroadcastUpdate = 5,
  kEnterPruning = 6,
  kEndTree = 7,
  kRequestStats = 8,
  kRequestTree = 9,
  // Replies.
  kAck = 64,
  kCensus = 65,
  kPartialSupersplit = 66,
  kBitmap = 67,
  kStats = 68,
  kTree = 69,
  kError = 127,
};

std::string_view msg_kind_name(MsgKind k);

// Every request and reply. A reply carries the (tree, depth) of its request.
struct Envelope {
  MsgKind kind = MsgKind::kAck;
  TreeIndex tree = 0;
  std::uint32_t depth = 0;
  std::vector<std::uint8_t> payload;
};

// Frame: magic (4), version (2), length (8), then `length` bytes holding
// kind (1), tree (4), depth (4) and the payload.
std::vector<std::uint8_t> encode_frame(const Envelope& e);
Envelope decode_frame(std::span<const std::uint8_t> frame);
// Payload length announced by a frame header.
std::uint64_t frame_body_length(std::span<const std::uint8_t> header);

Envelope error_envelope(const Envelope& request, Errc code, const std::string& message);
// Throws the Error carried by a kError envelope.
[[noreturn]] void raise_error_envelope(const Envelope& e);

// Payloads -------------------------------------------------------------------

struct ConfigureMsg {
  SeedContext seed;
  std::uint64_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t num_classes = 0;
  Criterion criterion = Criterion::kGini;
  std::uint64_t min_records = 1;
  CandidatePlan plan;
  std::vector<FeatureIndex> owned;
  std::uint32_t categorical_threads = 1;
  std::uint64_t classlist_chunk = 0;
};

struct SupersplitRequest {
  // Open leaves in class-list slot order.
  std::vector<OpenLeaf> leaves;
  // Features this splitter scans at this depth.
  std::vector<FeatureIndex> features;
};

struct EvaluationItem {
  NodeId leaf = 0;
  FeatureIndex feature = 0;
  Condition condition;
};

struct BroadcastMsg {
  DepthUpdate update;
  // Absent when no leaf was split at this depth.
  bool has_bitmap = false;
  ConditionBitmap bitmap;
};

struct ColumnCounters {
  TreeIndex tree = 0;
  FeatureIndex feature = 0;
  // Supersplit passes over the column.
  std::uint64_t scans = 0;
  // Entries read by those passes.
  std::uint64_t entries_read = 0;
  // Condition evaluation passes.
  std::uint64_t evaluations = 0;
  bool operator==(const ColumnCounters&) const = default;
};

struct SplitterStats {
  std::vector<ColumnCounters> columns;
  // Bytes materialized for pruned copies.
  std::uint64_t write_bytes = 0;
  std::uint64_t requests = 0;
  std::uint64_t duplicate_broadcasts = 0;
};

std::vector<std::uint8_t> encode_payload(const ConfigureMsg& m);
ConfigureMsg decode_configure(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const SupersplitRequest& m);
SupersplitRequest decode_supersplit_request(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const std::vector<EvaluationItem>& m);
std::vector<EvaluationItem> decode_evaluation_items(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const BroadcastMsg& m);
BroadcastMsg decode_broadcast(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const SplitterStats& m);
SplitterStats decode_stats(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const SuperSplit& m);
SuperSplit decode_supersplit_payload(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const LabelHistogram& m);
LabelHistogram decode_histogram_payload(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_payload(const ConditionBitmap& m);
ConditionBitmap decode_bitmap_payload(std::span<const std::uint8_t> bytes);

}  // namespace drf

#endif  // DRF_PROTOCOL_H_
