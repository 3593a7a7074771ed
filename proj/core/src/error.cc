// Copyright 2026 The restoreval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "restoreval/error.h"

namespace restoreval {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kTrailingData: return "TrailingData";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kHeaderMismatch: return "HeaderMismatch";
    case ErrorCode::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::kRaggedRow: return "RaggedRow";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndefiniteCovariance: return "IndefiniteCovariance";
    case ErrorCode::kAsymmetricCovariance: return "AsymmetricCovariance";
    case ErrorCode::kInsufficientFrames: return "InsufficientFrames";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kMissingBaseline: return "MissingBaseline";
    case ErrorCode::kMissingArtifact: return "MissingArtifact";
    case ErrorCode::kUnsupportedForm: return "UnsupportedForm";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace restoreval
