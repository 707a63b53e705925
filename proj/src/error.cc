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

#include "rc3e/error.h"

namespace rc3e {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateHostname: return "duplicate_hostname";
    case ErrorCode::kUnknownNode: return "unknown_node";
    case ErrorCode::kUnknownFpga: return "unknown_fpga";
    case ErrorCode::kNodeFull: return "node_full";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kSchemaVersionMismatch: return "schema_version_mismatch";
    case ErrorCode::kNoCapacity: return "no_capacity";
    case ErrorCode::kModelConflict: return "model_conflict";
    case ErrorCode::kUnknownLease: return "unknown_lease";
    case ErrorCode::kWrongServiceModel: return "wrong_service_model";
    case ErrorCode::kFootprintTooLarge: return "footprint_too_large";
    case ErrorCode::kRegionMismatch: return "region_mismatch";
    case ErrorCode::kInvalidBitfile: return "invalid_bitfile";
    case ErrorCode::kPermissionDenied: return "permission_denied";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kWrongDirection: return "wrong_direction";
    case ErrorCode::kNotConfigured: return "not_configured";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kMalformedFrame: return "malformed_frame";
    case ErrorCode::kNoPreset: return "no_preset";
    case ErrorCode::kUnknownKind: return "unknown_kind";
    case ErrorCode::kEmptyQueueBeforePredicate: return "empty_queue_before_predicate";
    case ErrorCode::kFifoUnderrun: return "fifo_underrun";
    case ErrorCode::kFifoFull: return "fifo_full";
    case ErrorCode::kUnknownJob: return "unknown_job";
    case ErrorCode::kUnknownService: return "unknown_service";
    case ErrorCode::kUnknownHandle: return "unknown_handle";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kBadRequest: return "bad_request";
    case ErrorCode::kUnknownCmd: return "unknown_cmd";
    case ErrorCode::kConfigError: return "config_error";
    case ErrorCode::kBindError: return "bind_error";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

}  // namespace rc3e
