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

#include "rc3e/resource_vector.h"

#include <sstream>

#include "rc3e/error.h"

namespace rc3e {

ResourceVector ResourceVector::CheckedSub(const ResourceVector &o) const {
  ResourceVector r{lut - o.lut, ff - o.ff, dsp - o.dsp, bram36 - o.bram36};
  if (!r.IsNonNegative()) {
    throw Error(ErrorCode::kInvalidArgument,
                "resource subtraction underflow: " + ToString() + " - " + o.ToString());
  }
  return r;
}

ResourceVector ResourceVector::DivideFloor(int64_t parts) const {
  if (parts <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot divide resources into <= 0 parts");
  }
  return {lut / parts, ff / parts, dsp / parts, bram36 / parts};
}

std::string ResourceVector::ToString() const {
  std::ostringstream os;
  os << "{lut=" << lut << ", ff=" << ff << ", dsp=" << dsp << ", bram36=" << bram36 << "}";
  return os.str();
}

void to_json(nlohmann::json &j, const ResourceVector &r) {
  j = nlohmann::json{{"lut", r.lut}, {"ff", r.ff}, {"dsp", r.dsp}, {"bram36", r.bram36}};
}

void from_json(const nlohmann::json &j, ResourceVector &r) {
  j.at("lut").get_to(r.lut);
  j.at("ff").get_to(r.ff);
  j.at("dsp").get_to(r.dsp);
  j.at("bram36").get_to(r.bram36);
  if (!r.IsNonNegative()) {
    throw Error(ErrorCode::kInvalidArgument, "negative resource field in " + r.ToString());
  }
}

}  // namespace rc3e
