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

#include "rc3e/event_loop.h"

#include <thread>

#include "rc3e/error.h"

namespace rc3e {

EventId EventLoop::Schedule(SimDuration delay, Action action) {
  if (delay < SimDuration::zero()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot schedule an event in the past");
  }
  const EventId id = next_seq_++;
  const SimTime at = now_ + delay;
  queue_.emplace(Key{at, id}, std::move(action));
  index_.emplace(id, at);
  return id;
}

void EventLoop::Cancel(EventId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return;
  queue_.erase(Key{it->second, id});
  index_.erase(it);
}

std::optional<SimTime> EventLoop::NextEventTime() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.begin()->first.first;
}

void EventLoop::MoveClockTo(SimTime t) {
  if (t <= now_) return;
  if (time_scale_ > 0.0) {
    std::this_thread::sleep_for(
        std::chrono::duration<double, std::micro>(ToMicros(t - now_) * time_scale_));
  }
  now_ = t;
}

bool EventLoop::RunNext() {
  if (queue_.empty()) return false;
  auto node = queue_.extract(queue_.begin());
  index_.erase(node.key().second);
  MoveClockTo(node.key().first);
  node.mapped()();
  return true;
}

SimTime EventLoop::AdvanceUntil(const std::function<bool()> &predicate) {
  while (!predicate()) {
    if (!RunNext()) {
      throw Error(ErrorCode::kEmptyQueueBeforePredicate,
                  "event queue drained before the awaited condition held");
    }
  }
  return now_;
}

SimTime EventLoop::AdvanceBy(SimDuration d) {
  if (d < SimDuration::zero()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot advance by a negative duration");
  }
  const SimTime target = now_ + d;
  while (!queue_.empty() && queue_.begin()->first.first <= target) RunNext();
  MoveClockTo(target);
  return now_;
}

void EventLoop::RunUntilIdle() {
  while (RunNext()) {
  }
}

}  // namespace rc3e
