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

#include <string_view>

#include "json.hpp"
#include "rc3e/sim_time.h"

namespace rc3e {

enum class LatencyKind { kStatus, kConfigFull, kPartialReconfig, kGcsAccess, kUcsAccess };

/// Where a call originates: on the FPGA's own node, or routed through the
/// hypervisor (which is also the path for every other node).
enum class Locality { kLocal, kRemote };

LatencyKind ParseLatencyKind(std::string_view name);
Locality ParseLocality(std::string_view name);
const char *ToString(Locality l);

/// Fixed costs of status calls, configuration and config-space accesses.
struct LatencyTable {
  SimDuration status_local = MillisToDuration(11);
  SimDuration status_remote = MillisToDuration(80);
  SimDuration config_full_local = MillisToDuration(28370);
  SimDuration config_full_remote = MillisToDuration(29513);
  SimDuration pr_local = MillisToDuration(732);
  SimDuration pr_remote = MillisToDuration(912);
  SimDuration gcs_access = MillisToDuration(0.198);
  SimDuration ucs_access_1 = MillisToDuration(0.208);
  SimDuration ucs_access_2 = MillisToDuration(0.221);
  SimDuration ucs_access_4 = MillisToDuration(0.273);

  /// Returns the charge for one call. `vslot_count` only matters for ucs
  /// accesses, where 3 active vFPGAs are priced like 4.
  SimDuration Charge(LatencyKind kind, Locality path, int vslot_count = 1) const;

  /// Throws kConfigError unless all entries are positive and remote >= local.
  void Validate() const;

  /// Applies overrides given in milliseconds, e.g. {"pr_remote": 900,
  /// "ucs_access_by_count": {"1": 0.2}}. Unknown keys are a config error.
  static LatencyTable FromJson(const nlohmann::json &overrides);
  nlohmann::json ToJson() const;
};

}  // namespace rc3e
