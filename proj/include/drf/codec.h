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

#ifndef DRF_CODEC_H_
#define DRF_CODEC_H_

#include <vector>

#include "drf/bytes.h"
#include "drf/classlist.h"
#include "drf/split.h"

namespace drf {

void encode(ByteWriter& w, const LabelHistogram& h);
LabelHistogram decode_histogram(ByteReader& r);

void encode(ByteWriter& w, const Condition& c);
Condition decode_condition(ByteReader& r);

void encode(ByteWriter& w, const SplitCandidate& c);
SplitCandidate decode_candidate(ByteReader& r);

void encode(ByteWriter& w, const SuperSplit& s);
SuperSplit decode_supersplit(ByteReader& r);

void encode(ByteWriter& w, const std::vector<OpenLeaf>& leaves);
std::vector<OpenLeaf> decode_open_leaves(ByteReader& r);

void encode(ByteWriter& w, const DepthUpdate& u);
DepthUpdate decode_depth_update(ByteReader& r);

void encode(ByteWriter& w, const std::vector<std::uint32_t>& v);
std::vector<std::uint32_t> decode_u32_vector(ByteReader& r);

}  // namespace drf

#endif  // DRF_CODEC_H_
