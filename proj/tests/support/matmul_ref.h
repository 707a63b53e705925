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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace rc3e::testing {

/// Double-precision product of the i-th (A, B) pair of a packed batch, as
/// little-endian binary32 bytes. Independent of the library's helpers.
inline std::vector<double> ReferenceProduct(std::span<const uint8_t> batch, size_t n, size_t pair) {
  auto at = [&](size_t word) {
    const uint8_t *p = batch.data() + word * 4;
    const uint32_t bits = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                          (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return static_cast<double>(f);
  };
  const size_t base = pair * 2 * n * n;
  std::vector<double> c(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t k = 0; k < n; ++k) acc += at(base + i * n + k) * at(base + n * n + k * n + j);
      c[i * n + j] = acc;
    }
  }
  return c;
}

/// Worst relative error of `out` (packed products) against the reference,
/// measured against the row magnitude so near-zero entries do not blow up.
inline double MaxRelativeError(std::span<const uint8_t> batch, std::span<const uint8_t> out,
                               size_t n) {
  const size_t frame = n * n * 4;
  if (out.size() % frame != 0 || batch.size() != 2 * out.size()) return INFINITY;
  double worst = 0.0;
  for (size_t p = 0; p < out.size() / frame; ++p) {
    const std::vector<double> want = ReferenceProduct(batch, n, p);
    for (size_t e = 0; e < n * n; ++e) {
      float got;
      std::memcpy(&got, out.data() + p * frame + e * 4, 4);
      // Scale: sum of |a_ik * b_kj|, the size of the terms that were added.
      const size_t i = e / n;
      const size_t j = e % n;
      double scale = 0.0;
      for (size_t k = 0; k < n; ++k) {
        float a;
        float b;
        std::memcpy(&a, batch.data() + (p * 2 * n * n + i * n + k) * 4, 4);
        std::memcpy(&b, batch.data() + (p * 2 * n * n + n * n + k * n + j) * 4, 4);
        scale += std::abs(static_cast<double>(a) * b);
      }
      const double err = std::abs(static_cast<double>(got) - want[e]) / std::max(scale, 1e-30);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace rc3e::testing
