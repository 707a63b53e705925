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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rc3e/resource_vector.h"

namespace rc3e {

enum class KernelType { kLoopback, kMatmulStream };

NLOHMANN_JSON_SERIALIZE_ENUM(KernelType, {{KernelType::kLoopback, "loopback"},
                                          {KernelType::kMatmulStream, "matmul_stream"}})

const char *ToString(KernelType t);
KernelType ParseKernelType(const std::string &name);

/// A user core bound to a vFPGA: what it computes, how fast, and how much
/// fabric it occupies.
struct KernelBinding {
  KernelType type = KernelType::kLoopback;
  /// Matrix dimension; unused for loopback.
  uint32_t n = 0;
  double compute_rate = 0.0;
  ResourceVector footprint;

  bool operator==(const KernelBinding &) const = default;

  /// Input bytes per frame (one A,B pair), or 1 for loopback.
  uint64_t InputFrameBytes() const;
  /// Output bytes per frame (one product), or 1 for loopback.
  uint64_t OutputFrameBytes() const;
  /// Input bytes that must be processed before `out_bytes` of output exist.
  uint64_t InputNeededFor(uint64_t out_bytes) const;
  /// Output produced once `in_bytes` of input were consumed.
  uint64_t OutputFor(uint64_t in_bytes) const;
};

/// Calibrated streaming matrix-multiply cores: n=16 and n=32. `cores_hint`
/// is accepted for 1, 2 or 4 cores and does not change the single-core
/// binding. Throws kNoPreset for anything else.
KernelBinding Preset(uint32_t n, uint32_t cores_hint = 1);

/// Total area of a multi-core matmul design as synthesized (replication
/// overhead included). Throws kNoPreset for combinations never built.
ResourceVector MatmulDesignArea(uint32_t n, uint32_t cores);

/// Reference product of two n x n row-major matrices.
std::vector<float> MatmulOracle(std::span<const float> a, std::span<const float> b, size_t n);

/// Little-endian binary32 encoding used on the FIFO wire.
std::vector<uint8_t> EncodeFloats(std::span<const float> values);
std::vector<float> DecodeFloats(std::span<const uint8_t> bytes);

/// `count` random (A, B) pairs, A then B per pair, reproducible from `seed`.
std::vector<uint8_t> GenerateMatrixBatch(uint32_t n, uint64_t count, uint64_t seed);

/// Functional model of a core. Input arrives in arbitrary chunks; complete
/// frames are processed, partial ones buffered.
class StreamKernel {
 public:
  explicit StreamKernel(KernelBinding binding);

  std::vector<uint8_t> Step(std::span<const uint8_t> in_bytes);
  /// Throws kMalformedFrame if a partial frame is still buffered.
  void Finish() const;
  void Reset();

  const KernelBinding &binding() const { return binding_; }
  size_t buffered() const { return pending_.size(); }
  uint64_t frames() const { return frames_; }

 private:
  KernelBinding binding_;
  std::vector<uint8_t> pending_;
  uint64_t frames_ = 0;
};

}  // namespace rc3e
