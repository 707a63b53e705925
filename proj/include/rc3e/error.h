// Copyright 2026 The RC3E Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rc3e {

/// Stable error codes. The string form of each code is what travels on the
/// wire, so the names must not change once released.
enum class ErrorCode {
  kDuplicateHostname,
  kUnknownNode,
  kUnknownFpga,
  kNodeFull,
  kIoError,
  kSchemaVersionMismatch,
  kNoCapacity,
  kModelConflict,
  kUnknownLease,
  kWrongServiceModel,
  kFootprintTooLarge,
  kRegionMismatch,
  kInvalidBitfile,
  kPermissionDenied,
  kOutOfRange,
  kWrongDirection,
  kNotConfigured,
  kDimensionMismatch,
  kMalformedFrame,
  kNoPreset,
  kUnknownKind,
  kEmptyQueueBeforePredicate,
  kFifoUnderrun,
  kFifoFull,
  kUnknownJob,
  kUnknownService,
  kUnknownHandle,
  kInvalidArgument,
  kBadRequest,
  kUnknownCmd,
  kConfigError,
  kBindError,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return ErrorCodeName(code_); }

 private:
  ErrorCode code_;
};

}  // namespace rc3e
