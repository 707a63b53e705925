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
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>

#include "rc3e/sim_time.h"

namespace rc3e {

using EventId = uint64_t;

/// Discrete-event loop over the virtual timeline. Events fire in
/// (time, sequence) order and time never moves backwards.
///
/// With a positive time scale the loop also sleeps `scale * delta` of wall
/// time whenever virtual time advances, which is only meant for demos.
class EventLoop {
 public:
  using Action = std::function<void()>;

  SimTime Now() const { return now_; }

  /// Queues `action` at Now() + delay. Negative delays are rejected.
  EventId Schedule(SimDuration delay, Action action);
  /// Drops a pending event. Unknown or already fired ids are ignored.
  void Cancel(EventId id);

  /// Fires the earliest pending event. Returns false on an empty queue.
  bool RunNext();
  /// Runs events until `predicate` holds; throws kEmptyQueueBeforePredicate
  /// if the queue drains first.
  SimTime AdvanceUntil(const std::function<bool()> &predicate);
  /// Runs every event due up to Now() + d, then sets the clock to that time.
  SimTime AdvanceBy(SimDuration d);
  void RunUntilIdle();

  size_t pending() const { return queue_.size(); }
  std::optional<SimTime> NextEventTime() const;

  void set_time_scale(double scale) { time_scale_ = scale; }
  double time_scale() const { return time_scale_; }

 private:
  using Key = std::pair<SimTime, uint64_t>;

  void MoveClockTo(SimTime t);

  SimTime now_ = kSimEpoch;
  uint64_t next_seq_ = 0;
  std::map<Key, Action> queue_;
  std::unordered_map<EventId, SimTime> index_;
  double time_scale_ = 0.0;
};

}  // namespace rc3e
