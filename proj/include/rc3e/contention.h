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
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "rc3e/event_loop.h"
#include "rc3e/fleet.h"
#include "rc3e/sim_time.h"

namespace rc3e {

using SessionId = uint64_t;

enum class StreamDirection { kIn, kOut, kBidirectional };

/// A transfer sharing its device's host link with every other active session
/// on that device. Rates are in MB/s, which is numerically bytes per
/// microsecond.
struct StreamSession {
  SessionId id = 0;
  FpgaId device_id = 0;
  int vslot_span = 1;
  StreamDirection direction = StreamDirection::kBidirectional;
  uint64_t total_bytes = 0;
  double bytes_done = 0.0;
  double compute_cap = 0.0;
  SimTime started_at = kSimEpoch;
  double rate_now = 0.0;
};

inline constexpr double kUncapped = std::numeric_limits<double>::infinity();

/// Max-min fair split of `link_bandwidth` among sessions with rate caps
/// (progressive filling). Sessions whose cap is below the fair share keep
/// their cap and leave the surplus to the others.
std::vector<double> ContendedRates(std::span<const double> caps, double link_bandwidth);

/// Fluid model of concurrent transfers. Whenever the set of sessions on a
/// device changes, rates are recomputed and the next crossing (a watched
/// byte threshold or a completion) is rescheduled on the event loop.
/// Crossing times are solved exactly and recorded in microseconds; the loop
/// fires at the next whole microsecond.
class ContentionEngine {
 public:
  using Callback = std::function<void()>;

  explicit ContentionEngine(EventLoop &loop) : loop_(loop) {}
  ContentionEngine(const ContentionEngine &) = delete;
  ContentionEngine &operator=(const ContentionEngine &) = delete;

  void SetLinkBandwidth(FpgaId device, double mbps);
  double LinkBandwidth(FpgaId device) const;

  SessionId Open(FpgaId device, uint64_t bytes, double compute_cap, Callback on_complete = {},
                 int vslot_span = 1, StreamDirection direction = StreamDirection::kBidirectional);
  /// Appends bytes to an active session without changing its start time.
  /// Returns false if the session finished at the current instant instead.
  bool Extend(SessionId id, uint64_t more_bytes);
  /// Calls `cb` (via the event loop) once bytes_done reaches `threshold`.
  /// Watches above the final byte count are dropped when the session ends.
  void Watch(SessionId id, uint64_t threshold, Callback cb);
  /// Aborts a session. Its completion callback never runs.
  void Close(SessionId id);

  bool IsActive(SessionId id) const;
  /// Progress at the loop's current time, also valid for ended sessions.
  double BytesDone(SessionId id) const;
  StreamSession Snapshot(SessionId id) const;
  std::vector<StreamSession> Sessions(FpgaId device) const;
  /// Exact completion instant of a session that ran to the end.
  std::optional<double> CompletionMicros(SessionId id) const;

  /// Runs the loop until the session has finished; returns the loop time.
  SimTime RunTransfer(SessionId id);

 private:
  struct Active {
    StreamSession s;
    std::multimap<double, Callback> watches;
    Callback on_complete;
  };
  struct Ended {
    StreamSession s;
    std::optional<double> completed_at_us;
  };
  struct Device {
    double link = 800.0;
    double clock_us = 0.0;
    std::vector<SessionId> sessions;
    std::optional<EventId> pending;
  };

  Device &DeviceFor(FpgaId id);
  Active &ActiveFor(SessionId id);
  void Sync(FpgaId device, double target_us);
  void Recompute(Device &dev);
  void Reschedule(FpgaId device);
  double NextThreshold(const Active &a) const;
  void Defer(Callback cb);

  EventLoop &loop_;
  SessionId next_id_ = 1;
  std::unordered_map<FpgaId, Device> devices_;
  std::unordered_map<SessionId, Active> active_;
  std::unordered_map<SessionId, Ended> ended_;
};

}  // namespace rc3e
