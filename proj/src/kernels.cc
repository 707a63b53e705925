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

#include "rc3e/kernels.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <random>

#include "rc3e/error.h"

namespace rc3e {

const char *ToString(KernelType t) {
  return t == KernelType::kLoopback ? "loopback" : "matmul_stream";
}

KernelType ParseKernelType(const std::string &name) {
  if (name == "loopback") return KernelType::kLoopback;
  if (name == "matmul_stream") return KernelType::kMatmulStream;
  throw Error(ErrorCode::kInvalidBitfile, "unknown kernel type: " + name);
}

uint64_t KernelBinding::InputFrameBytes() const {
  return type == KernelType::kLoopback ? 1 : 2ULL * n * n * sizeof(float);
}

uint64_t KernelBinding::OutputFrameBytes() const {
  return type == KernelType::kLoopback ? 1 : 1ULL * n * n * sizeof(float);
}

uint64_t KernelBinding::InputNeededFor(uint64_t out_bytes) const {
  const uint64_t frames = (out_bytes + OutputFrameBytes() - 1) / OutputFrameBytes();
  return frames * InputFrameBytes();
}

uint64_t KernelBinding::OutputFor(uint64_t in_bytes) const {
  return (in_bytes / InputFrameBytes()) * OutputFrameBytes();
}

KernelBinding Preset(uint32_t n, uint32_t cores_hint) {
  if (cores_hint != 1 && cores_hint != 2 && cores_hint != 4) {
    throw Error(ErrorCode::kNoPreset, "cores_hint must be 1, 2 or 4");
  }
  KernelBinding b;
  b.type = KernelType::kMatmulStream;
  b.n = n;
  if (n == 16) {
    b.compute_rate = 509.0;
    b.footprint = {25298, 41654, 80, 14};
  } else if (n == 32) {
    b.compute_rate = 279.0;
    b.footprint = {64711, 125715, 160, 14};
  } else {
    throw Error(ErrorCode::kNoPreset, "no calibrated matmul core for n=" + std::to_string(n));
  }
  return b;
}

ResourceVector MatmulDesignArea(uint32_t n, uint32_t cores) {
  if (n == 16 && cores == 1) return {25298, 41654, 80, 14};
  if (n == 16 && cores == 2) return {44408, 76963, 160, 19};
  if (n == 16 && cores == 4) return {81761, 146974, 320, 28};
  if (n == 32 && cores == 1) return {64711, 125715, 160, 14};
  if (n == 32 && cores == 2) return {123249, 245103, 320, 19};
  throw Error(ErrorCode::kNoPreset, "no synthesized design for n=" + std::to_string(n) +
                                        " with " + std::to_string(cores) + " cores");
}

std::vector<float> MatmulOracle(std::span<const float> a, std::span<const float> b, size_t n) {
  if (a.size() != n * n || b.size() != n * n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "operands must both be " + std::to_string(n) + "x" + std::to_string(n));
  }
  std::vector<float> c(n * n, 0.0f);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (size_t k = 0; k < n; ++k) acc += a[i * n + k] * b[k * n + j];
      c[i * n + j] = acc;
    }
  }
  return c;
}

namespace {

void LoadFloats(const uint8_t *src, size_t count, float *dst) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, count * sizeof(float));
  } else {
    for (size_t i = 0; i < count; ++i) {
      uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) bits |= static_cast<uint32_t>(src[i * 4 + k]) << (8 * k);
      dst[i] = std::bit_cast<float>(bits);
    }
  }
}

void StoreFloats(const float *src, size_t count, uint8_t *dst) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, count * sizeof(float));
  } else {
    for (size_t i = 0; i < count; ++i) {
      const uint32_t bits = std::bit_cast<uint32_t>(src[i]);
      for (int k = 0; k < 4; ++k) dst[i * 4 + k] = static_cast<uint8_t>(bits >> (8 * k));
    }
  }
}

}  // namespace

std::vector<uint8_t> EncodeFloats(std::span<const float> values) {
  std::vector<uint8_t> out(values.size() * sizeof(float));
  StoreFloats(values.data(), values.size(), out.data());
  return out;
}

std::vector<float> DecodeFloats(std::span<const uint8_t> bytes) {
  if (bytes.size() % sizeof(float) != 0) {
    throw Error(ErrorCode::kMalformedFrame, "float stream length is not a multiple of 4");
  }
  std::vector<float> out(bytes.size() / sizeof(float));
  LoadFloats(bytes.data(), out.size(), out.data());
  return out;
}

std::vector<uint8_t> GenerateMatrixBatch(uint32_t n, uint64_t count, uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "matrix dimension must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(count * 2 * n * n);
  for (float &v : values) v = dist(rng);
  return EncodeFloats(values);
}

namespace {

// Row-broadcast order: each A element is multiplied into a full row of B,
// which is how a pipelined core consumes the streamed operands.
void MultiplyRowBroadcast(const float *a, const float *b, size_t n, float *c) {
  std::fill(c, c + n * n, 0.0f);
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < n; ++k) {
      const float aik = a[i * n + k];
      for (size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
}

}  // namespace

StreamKernel::StreamKernel(KernelBinding binding) : binding_(binding) {
  if (binding_.type == KernelType::kMatmulStream && binding_.n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "matmul kernel needs n > 0");
  }
}

std::vector<uint8_t> StreamKernel::Step(std::span<const uint8_t> in_bytes) {
  if (binding_.type == KernelType::kLoopback) {
    frames_ += in_bytes.size();
    return {in_bytes.begin(), in_bytes.end()};
  }
  const size_t frame = binding_.InputFrameBytes();
  const size_t nn = static_cast<size_t>(binding_.n) * binding_.n;
  const size_t out_frame = binding_.OutputFrameBytes();
  std::vector<uint8_t> out;
  out.reserve((pending_.size() + in_bytes.size()) / frame * out_frame);
  std::vector<float> operands(2 * nn);
  std::vector<float> product(nn);
  size_t pos = 0;

  auto emit = [&](std::span<const uint8_t> pair) {
    LoadFloats(pair.data(), 2 * nn, operands.data());
    MultiplyRowBroadcast(operands.data(), operands.data() + nn, binding_.n, product.data());
    const size_t at = out.size();
    out.resize(at + out_frame);
    StoreFloats(product.data(), nn, out.data() + at);
    ++frames_;
  };

  if (!pending_.empty()) {
    const size_t take = std::min(frame - pending_.size(), in_bytes.size());
    pending_.insert(pending_.end(), in_bytes.begin(), in_bytes.begin() + take);
    pos = take;
    if (pending_.size() < frame) return out;
    emit(pending_);
    pending_.clear();
  }
  while (in_bytes.size() - pos >= frame) {
    emit(in_bytes.subspan(pos, frame));
    pos += frame;
  }
  pending_.assign(in_bytes.begin() + pos, in_bytes.end());
  return out;
}

void StreamKernel::Finish() const {
  if (!pending_.empty()) {
    throw Error(ErrorCode::kMalformedFrame,
                std::to_string(pending_.size()) + " trailing bytes do not form a matrix pair");
  }
}

void StreamKernel::Reset() {
  pending_.clear();
  frames_ = 0;
}

}  // namespace rc3e
