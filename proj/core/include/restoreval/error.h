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

#ifndef RESTOREVAL_ERROR_H_
#define RESTOREVAL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace restoreval {

enum class ErrorCode {
  // core-data
  kBadMagic,
  kUnsupportedDtype,
  kTruncatedPayload,
  kTrailingData,
  kNonFiniteValue,
  kIoFailure,
  kHeaderMismatch,
  kNonMonotonicTime,
  kRaggedRow,
  kParseError,
  kValidationError,
  // frechet
  kTooFewSamples,
  kDimensionMismatch,
  kIndefiniteCovariance,
  kAsymmetricCovariance,
  kInsufficientFrames,
  // lpips
  kShapeMismatch,
  kEmptySequence,
  // series metrics
  kEmptySeries,
  kInsufficientOverlap,
  kChannelMismatch,
  // study plan
  kMissingBaseline,
  kMissingArtifact,
  // synth
  kUnsupportedForm,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception; `code()` is the
// stable, testable part and `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace restoreval

#endif  // RESTOREVAL_ERROR_H_
