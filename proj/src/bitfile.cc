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

#include "rc3e/bitfile.h"

#include "rc3e/error.h"

namespace rc3e {

using nlohmann::json;

KernelBinding Bitfile::Binding() const {
  KernelBinding b;
  b.type = kernel_type;
  b.n = kernel_n;
  b.compute_rate = compute_rate_mbps;
  b.footprint = footprint;
  return b;
}

void Bitfile::ValidateDescriptor() const {
  if (name.empty()) throw Error(ErrorCode::kInvalidBitfile, "bitfile needs a name");
  if (target_model.empty()) throw Error(ErrorCode::kInvalidBitfile, name + ": no target model");
  if (!(compute_rate_mbps > 0.0)) {
    throw Error(ErrorCode::kInvalidBitfile, name + ": compute_rate_mbps must be positive");
  }
  if (!footprint.IsNonNegative()) {
    throw Error(ErrorCode::kInvalidBitfile, name + ": negative footprint");
  }
  if (kind == BitfileKind::kPartial && region_span != 1 && region_span != 2 && region_span != 4) {
    throw Error(ErrorCode::kInvalidBitfile, name + ": region_span must be 1, 2 or 4");
  }
  if (kernel_type == KernelType::kMatmulStream && kernel_n == 0) {
    throw Error(ErrorCode::kInvalidBitfile, name + ": matmul kernel needs params.n");
  }
}

void Bitfile::ValidateFootprint(const FpgaModel &model) const {
  const ResourceVector bound =
      kind == BitfileKind::kFull ? model.capacity : model.SlotCapacity() * region_span;
  if (!footprint.FitsWithin(bound)) {
    throw Error(ErrorCode::kFootprintTooLarge,
                name + ": footprint " + footprint.ToString() + " exceeds " + bound.ToString());
  }
}

Bitfile BitfileFromJson(const json &j) {
  try {
    Bitfile b;
    j.at("name").get_to(b.name);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "full") b.kind = BitfileKind::kFull;
    else if (kind == "partial") b.kind = BitfileKind::kPartial;
    else throw Error(ErrorCode::kInvalidBitfile, "kind must be full or partial");
    j.at("target_model").get_to(b.target_model);
    b.region_span = j.value("region_span", 1);
    b.footprint = j.at("footprint").get<ResourceVector>();
    const json &kernel = j.at("kernel");
    b.kernel_type = ParseKernelType(kernel.at("type").get<std::string>());
    if (kernel.contains("params") && kernel.at("params").contains("n")) {
      kernel.at("params").at("n").get_to(b.kernel_n);
    }
    j.at("compute_rate_mbps").get_to(b.compute_rate_mbps);
    b.ValidateDescriptor();
    return b;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidBitfile, std::string("bitfile descriptor: ") + e.what());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kInvalidBitfile) throw;
    throw Error(ErrorCode::kInvalidBitfile, std::string("bitfile descriptor: ") + e.what());
  }
}

json BitfileToJson(const Bitfile &b) {
  json params = json::object();
  if (b.kernel_type == KernelType::kMatmulStream) params["n"] = b.kernel_n;
  return json{{"name", b.name},
              {"kind", b.kind == BitfileKind::kFull ? "full" : "partial"},
              {"target_model", b.target_model},
              {"region_span", b.region_span},
              {"footprint", b.footprint},
              {"kernel", {{"type", ToString(b.kernel_type)}, {"params", params}}},
              {"compute_rate_mbps", b.compute_rate_mbps}};
}

Bitfile MatmulBitfile(uint32_t n, const FpgaModel &model) {
  const KernelBinding k = Preset(n);
  Bitfile b;
  b.name = "matmul" + std::to_string(n);
  b.kind = BitfileKind::kPartial;
  b.target_model = model.name;
  b.region_span = 1;
  b.footprint = k.footprint;
  b.kernel_type = k.type;
  b.kernel_n = k.n;
  b.compute_rate_mbps = k.compute_rate;
  return b;
}

Bitfile LoopbackBitfile(const FpgaModel &model, double rate_mbps) {
  Bitfile b;
  b.name = "loopback";
  b.kind = BitfileKind::kPartial;
  b.target_model = model.name;
  b.region_span = 1;
  b.footprint = {512, 1024, 0, 2};
  b.kernel_type = KernelType::kLoopback;
  b.compute_rate_mbps = rate_mbps;
  return b;
}

}  // namespace rc3e
