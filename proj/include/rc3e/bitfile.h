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

#include <string>

#include "json.hpp"
#include "rc3e/fleet.h"
#include "rc3e/kernels.h"
#include "rc3e/resource_vector.h"

namespace rc3e {

enum class BitfileKind { kFull, kPartial };

NLOHMANN_JSON_SERIALIZE_ENUM(BitfileKind, {{BitfileKind::kFull, "full"},
                                           {BitfileKind::kPartial, "partial"}})

/// Metadata descriptor standing in for a configuration bitstream. Only the
/// descriptor is validated (footprint, region span, model match); bitstream
/// contents are not modelled.
struct Bitfile {
  std::string name;
  BitfileKind kind = BitfileKind::kPartial;
  std::string target_model;
  /// Number of regions a partial design covers; ignored for full designs.
  int region_span = 1;
  ResourceVector footprint;
  KernelType kernel_type = KernelType::kLoopback;
  uint32_t kernel_n = 0;
  double compute_rate_mbps = 0.0;

  bool operator==(const Bitfile &) const = default;

  KernelBinding Binding() const;
  /// Self-consistency checks; throws kInvalidBitfile.
  void ValidateDescriptor() const;
  /// Footprint bound for the given device model; throws kFootprintTooLarge.
  void ValidateFootprint(const FpgaModel &model) const;
};

/// Descriptor format: {name, kind, target_model, region_span, footprint,
/// kernel: {type, params}, compute_rate_mbps}. Shape errors surface as
/// kInvalidBitfile.
Bitfile BitfileFromJson(const nlohmann::json &j);
nlohmann::json BitfileToJson(const Bitfile &b);

/// One-region partial bitfile wrapping a calibrated matmul core.
Bitfile MatmulBitfile(uint32_t n, const FpgaModel &model = Xc7vx485t());
/// One-region partial loopback design with the given rate cap.
Bitfile LoopbackBitfile(const FpgaModel &model = Xc7vx485t(), double rate_mbps = 800.0);

}  // namespace rc3e
