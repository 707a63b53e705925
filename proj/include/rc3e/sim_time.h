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

#include <chrono>
#include <cmath>
#include <cstdint>

namespace rc3e {

/// Tag clock for the virtual timeline. It has no now(); the event loop owns
/// the current time.
struct VirtualClock {
  using duration = std::chrono::microseconds;
  using rep = duration::rep;
  using period = duration::period;
  using time_point = std::chrono::time_point<VirtualClock, duration>;
  static constexpr bool is_steady = true;
};

using SimDuration = VirtualClock::duration;
using SimTime = VirtualClock::time_point;

inline constexpr SimTime kSimEpoch{};

inline constexpr int64_t ToMicros(SimTime t) { return t.time_since_epoch().count(); }
inline constexpr int64_t ToMicros(SimDuration d) { return d.count(); }
inline constexpr double ToSeconds(SimDuration d) { return static_cast<double>(d.count()) * 1e-6; }
inline constexpr double ToSeconds(SimTime t) { return ToSeconds(t.time_since_epoch()); }

inline SimDuration MillisToDuration(double ms) {
  return SimDuration{static_cast<int64_t>(std::llround(ms * 1000.0))};
}

}  // namespace rc3e
