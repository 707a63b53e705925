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

#include <cstdint>
#include <string>

#include "json.hpp"

namespace rc3e {

/// FPGA fabric area: LUTs, flip-flops, DSP slices and 36 Kb block RAMs.
struct ResourceVector {
  int64_t lut = 0;
  int64_t ff = 0;
  int64_t dsp = 0;
  int64_t bram36 = 0;

  bool operator==(const ResourceVector &) const = default;

  bool IsNonNegative() const { return lut >= 0 && ff >= 0 && dsp >= 0 && bram36 >= 0; }

  /// Componentwise `*this <= other`.
  bool FitsWithin(const ResourceVector &other) const {
    return lut <= other.lut && ff <= other.ff && dsp <= other.dsp && bram36 <= other.bram36;
  }

  ResourceVector operator+(const ResourceVector &o) const {
    return {lut + o.lut, ff + o.ff, dsp + o.dsp, bram36 + o.bram36};
  }
  ResourceVector &operator+=(const ResourceVector &o) { return *this = *this + o; }

  ResourceVector operator*(int64_t k) const { return {lut * k, ff * k, dsp * k, bram36 * k}; }

  /// Subtraction that throws kInvalidArgument instead of going negative.
  ResourceVector CheckedSub(const ResourceVector &o) const;

  /// Floor division of every component.
  ResourceVector DivideFloor(int64_t parts) const;

  std::string ToString() const;
};

void to_json(nlohmann::json &j, const ResourceVector &r);
void from_json(const nlohmann::json &j, ResourceVector &r);

}  // namespace rc3e
