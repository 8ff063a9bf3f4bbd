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

#include "drf/common.h"

namespace drf {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kParseError: return "ParseError";
    case Errc::kUnknownCategory: return "UnknownCategory";
    case Errc::kArityOverflow: return "ArityOverflow";
    case Errc::kRaggedRow: return "RaggedRow";
    case Errc::kIoFailure: return "IoFailure";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kBitmapLengthMismatch: return "BitmapLengthMismatch";
    case Errc::kHistogramInconsistent: return "HistogramInconsistent";
    case Errc::kFeatureNotOwned: return "FeatureNotOwned";
    case Errc::kUnplacedFeature: return "UnplacedFeature";
    case Errc::kSplitterUnreachable: return "SplitterUnreachable";
    case Errc::kProtocolDesync: return "ProtocolDesync";
    case Errc::kTimeout: return "Timeout";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kDegenerateLabels: return "DegenerateLabels";
    case Errc::kNoOobSamples: return "NoOobSamples";
    case Errc::kOutOfMemoryGuard: return "OutOfMemoryGuard";
  }
  return "Unknown";
}

}  // namespace drf
