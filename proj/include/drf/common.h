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

#ifndef DRF_COMMON_H_
#define DRF_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drf {

// Dense 0-based sample index assigned at ingest.
using SampleIndex = std::uint64_t;
using ClassId = std::uint32_t;
using FeatureIndex = std::uint32_t;
// Node id inside one tree, breadth-first creation order, root = 0.
using NodeId = std::uint32_t;
using TreeIndex = std::uint32_t;
using WorkerId = std::uint32_t;

enum class Errc {
  kInvalidArgument,
  kParseError,
  kUnknownCategory,
  kArityOverflow,
  kRaggedRow,
  kIoFailure,
  kIndexOutOfRange,
  kBitmapLengthMismatch,
  kHistogramInconsistent,
  kFeatureNotOwned,
  kUnplacedFeature,
  kSplitterUnreachable,
  kProtocolDesync,
  kTimeout,
  kVersionMismatch,
  kDegenerateLabels,
  kNoOobSamples,
  kOutOfMemoryGuard,
};

std::string_view errc_name(Errc code);

// Every module reports failures through this exception; `code()` carries the
// error kind named by the module contracts.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace drf

#endif  // DRF_COMMON_H_
