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

#include "drf/protocol.h"

#include "drf/codec.h"

namespace drf {

std::string_view msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::kConfigure: return "Configure";
    case MsgKind::kBeginTree: return "BeginTree";
    case MsgKind::kRequestSupersplit: return "RequestSupersplit";
    case MsgKind::kEvaluateConditions: return "EvaluateConditions";
    case MsgKind::kBroadcastUpdate: return "BroadcastUpdate";
    case MsgKind::kEnterPruning: return "EnterPruning";
    case MsgKind::kEndTree: return "EndTree";
    case MsgKind::kRequestStats: return "RequestStats";
    case MsgKind::kRequestTree: return "RequestTree";
    case MsgKind::kAck: return "Ack";
    case MsgKind::kCensus: return "Census";
    case MsgKind::kPartialSupersplit: return "PartialSupersplit";
    case MsgKind::kBitmap: return "Bitmap";
    case MsgKind::kStats: return "Stats";
    case MsgKind::kTree: return "Tree";
    case MsgKind::kError: return "Error";
  }
  return "Unknown";
}

std::vector<std::uint8_t> encode_frame(const Envelope& e) {
  ByteWriter w;
  w.u32(kFrameMagic);
  w.u16(kProtocolVersion);
  w.u64(9 + e.payload.size());
  w.u8(static_cast<std::uint8_t>(e.kind));
  w.u32(e.tree);
  w.u32(e.depth);
  w.bytes(e.payload);
  return w.release();
}

std::uint64_t frame_body_length(std::span<const std::uint8_t> header) {
  ByteReader r(header.first(kFrameHeaderBytes));
  if (r.u32() != kFrameMagic) throw Error(Errc::kProtocolDesync, "bad frame magic");
  const std::uint16_t version = r.u16();
  if (version != kProtocolVersion) {
    throw Error(Errc::kVersionMismatch, "peer speaks protocol version " + std::to_string(version));
  }
  return r.u64();
}

Envelope decode_frame(std::span<const std::uint8_t> frame) {
  if (frame.size() < kFrameHeaderBytes) throw Error(Errc::kProtocolDesync, "short frame");
  const std::uint64_t length = frame_body_length(frame);
  if (length < 9 || frame.size() - kFrameHeaderBytes != length) {
    throw Error(Errc::kProtocolDesync, "frame length mismatch");
  }
  ByteReader r(frame.subspan(kFrameHeaderBytes));
  Envelope e;
  e.kind = static_cast<MsgKind>(r.u8());
  e.tree = r.u32();
  e.depth = r.u32();
  auto rest = r.bytes(r.remaining());
  e.payload.assign(rest.begin(), rest.end());
  return e;
}

Envelope error_envelope(const Envelope& request, Errc code, const std::string& message) {
  Envelope e;
  e.kind = MsgKind::kError;
  e.tree = request.tree;
  e.depth = request.depth;
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(code));
  w.str(message);
  e.payload = w.release();
  return e;
}

void raise_error_envelope(const Envelope& e) {
  ByteReader r(e.payload);
  const auto code = static_cast<Errc>(r.u32());
  std::string message = r.str();
  // Strip the "<Errc>: " prefix added by the remote Error constructor.
  const std::string prefix = std::string(errc_name(code)) + ": ";
  if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
  throw Error(code, message);
}

namespace {

void encode_seed(ByteWriter& w, const SeedContext& s) {
  w.u32(SeedContext::kVersion);
  w.u64(s.forest_seed);
  w.u64(s.a);
  w.u64(s.b);
  w.u64(s.modulus);
  w.u32(s.steps);
  for (double c : s.cdf) w.f64(c);
}

SeedContext decode_seed(ByteReader& r) {
  const std::uint32_t version = r.u32();
  if (version != SeedContext::kVersion) {
    throw Error(Errc::kVersionMismatch, "seed context version " + std::to_string(version));
  }
  SeedContext s;
  s.forest_seed = r.u64();
  s.a = r.u64();
  s.b = r.u64();
  s.modulus = r.u64();
  s.steps = r.u32();
  for (double& c : s.cdf) c = r.f64();
  return s;
}

void expect_done(const ByteReader& r, std::string_view what) {
  if (!r.done()) throw Error(Errc::kProtocolDesync, "trailing bytes in " + std::string(what));
}

}  // namespace

std::vector<std::uint8_t> encode_payload(const ConfigureMsg& m) {
  ByteWriter w;
  encode_seed(w, m.seed);
  w.u64(m.n);
  w.u32(m.m);
  w.u32(m.num_classes);
  w.u8(static_cast<std::uint8_t>(m.criterion));
  w.u64(m.min_records);
  w.u8(m.plan.usb ? 1 : 0);
  w.u32(m.plan.m_prime);
  encode(w, m.owned);
  w.u32(m.categorical_threads);
  w.u64(m.classlist_chunk);
  return w.release();
}

ConfigureMsg decode_configure(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ConfigureMsg m;
  m.seed = decode_seed(r);
  m.n = r.u64();
  m.m = r.u32();
  m.num_classes = r.u32();
  m.criterion = static_cast<Criterion>(r.u8());
  m.min_records = r.u64();
  m.plan.usb = r.u8() != 0;
  m.plan.m_prime = r.u32();
  m.owned = decode_u32_vector(r);
  m.categorical_threads = r.u32();
  m.classlist_chunk = r.u64();
  expect_done(r, "Configure");
  return m;
}

std::vector<std::uint8_t> encode_payload(const SupersplitRequest& m) {
  ByteWriter w;
  encode(w, m.leaves);
  encode(w, m.features);
  return w.release();
}

SupersplitRequest decode_supersplit_request(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  SupersplitRequest m;
  m.leaves = decode_open_leaves(r);
  m.features = decode_u32_vector(r);
  expect_done(r, "RequestSupersplit");
  return m;
}

std::vector<std::uint8_t> encode_payload(const std::vector<EvaluationItem>& m) {
  ByteWriter w;
  w.u64(m.size());
  for (const auto& item : m) {
    w.u32(item.leaf);
    w.u32(item.feature);
    encode(w, item.condition);
  }
  return w.release();
}

std::vector<EvaluationItem> decode_evaluation_items(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::vector<EvaluationItem> items(r.u64());
  for (auto& item : items) {
    item.leaf = r.u32();
    item.feature = r.u32();
    item.condition = decode_condition(r);
  }
  expect_done(r, "EvaluateConditions");
  return items;
}

std::vector<std::uint8_t> encode_payload(const BroadcastMsg& m) {
  ByteWriter w;
  encode(w, m.update);
  w.u8(m.has_bitmap ? 1 : 0);
  if (m.has_bitmap) m.bitmap.encode(w);
  return w.release();
}

BroadcastMsg decode_broadcast(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  BroadcastMsg m;
  m.update = decode_depth_update(r);
  m.has_bitmap = r.u8() != 0;
  if (m.has_bitmap) m.bitmap = ConditionBitmap::decode(r);
  expect_done(r, "BroadcastUpdate");
  return m;
}

std::vector<std::uint8_t> encode_payload(const SplitterStats& m) {
  ByteWriter w;
  w.u64(m.columns.size());
  for (const auto& c : m.columns) {
    w.u32(c.tree);
    w.u32(c.feature);
    w.u64(c.scans);
    w.u64(c.entries_read);
    w.u64(c.evaluations);
  }
  w.u64(m.write_bytes);
  w.u64(m.requests);
  w.u64(m.duplicate_broadcasts);
  return w.release();
}

SplitterStats decode_stats(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  SplitterStats m;
  m.columns.resize(r.u64());
  for (auto& c : m.columns) {
    c.tree = r.u32();
    c.feature = r.u32();
    c.scans = r.u64();
    c.entries_read = r.u64();
    c.evaluations = r.u64();
  }
  m.write_bytes = r.u64();
  m.requests = r.u64();
  m.duplicate_broadcasts = r.u64();
  expect_done(r, "Stats");
  return m;
}

std::vector<std::uint8_t> encode_payload(const SuperSplit& m) {
  ByteWriter w;
  encode(w, m);
  return w.release();
}

SuperSplit decode_supersplit_payload(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  SuperSplit s = decode_supersplit(r);
  expect_done(r, "PartialSupersplit");
  return s;
}

std::vector<std::uint8_t> encode_payload(const LabelHistogram& m) {
  ByteWriter w;
  encode(w, m);
  return w.release();
}

LabelHistogram decode_histogram_payload(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  LabelHistogram h = decode_histogram(r);
  expect_done(r, "Census");
  return h;
}

std::vector<std::uint8_t> encode_payload(const ConditionBitmap& m) {
  ByteWriter w;
  m.encode(w);
  return w.release();
}

ConditionBitmap decode_bitmap_payload(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ConditionBitmap b = ConditionBitmap::decode(r);
  expect_done(r, "Bitmap");
  return b;
}

}  // namespace drf
