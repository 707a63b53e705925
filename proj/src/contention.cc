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

#include "rc3e/contention.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rc3e/error.h"

namespace rc3e {

namespace {
// Byte slack when deciding that a threshold has been crossed.
constexpr double kByteEpsilon = 1e-6;
}  // namespace

std::vector<double> ContendedRates(std::span<const double> caps, double link_bandwidth) {
  std::vector<double> rates(caps.size(), 0.0);
  std::vector<size_t> order(caps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return caps[a] < caps[b]; });

  double remaining = link_bandwidth;
  size_t left = caps.size();
  for (size_t k = 0; k < order.size(); ++k) {
    const double share = remaining / static_cast<double>(left);
    if (caps[order[k]] <= share) {
      rates[order[k]] = caps[order[k]];
      remaining -= caps[order[k]];
      --left;
      continue;
    }
    // Every session from here on is capped above the fair share.
    for (size_t r = k; r < order.size(); ++r) rates[order[r]] = share;
    break;
  }
  return rates;
}

void ContentionEngine::SetLinkBandwidth(FpgaId device, double mbps) {
  if (!(mbps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "link bandwidth must be positive");
  Sync(device, static_cast<double>(ToMicros(loop_.Now())));
  DeviceFor(device).link = mbps;
  Recompute(DeviceFor(device));
  Reschedule(device);
}

double ContentionEngine::LinkBandwidth(FpgaId device) const {
  auto it = devices_.find(device);
  return it == devices_.end() ? 800.0 : it->second.link;
}

ContentionEngine::Device &ContentionEngine::DeviceFor(FpgaId id) {
  auto [it, inserted] = devices_.try_emplace(id);
  if (inserted) it->second.clock_us = static_cast<double>(ToMicros(loop_.Now()));
  return it->second;
}

ContentionEngine::Active &ContentionEngine::ActiveFor(SessionId id) {
  auto it = active_.find(id);
  if (it == active_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no active stream session " + std::to_string(id));
  }
  return it->second;
}

void ContentionEngine::Defer(Callback cb) {
  if (cb) loop_.Schedule(SimDuration::zero(), std::move(cb));
}

SessionId ContentionEngine::Open(FpgaId device, uint64_t bytes, double compute_cap,
                                 Callback on_complete, int vslot_span,
                                 StreamDirection direction) {
  if (!(compute_cap > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "compute cap must be positive");
  }
  const double now_us = static_cast<double>(ToMicros(loop_.Now()));
  Sync(device, now_us);

  const SessionId id = next_id_++;
  StreamSession s;
  s.id = id;
  s.device_id = device;
  s.vslot_span = vslot_span;
  s.direction = direction;
  s.total_bytes = bytes;
  s.compute_cap = compute_cap;
  s.started_at = loop_.Now();

  if (bytes == 0) {
    ended_.emplace(id, Ended{s, now_us});
    Defer(std::move(on_complete));
    return id;
  }
  active_.emplace(id, Active{s, {}, std::move(on_complete)});
  Device &dev = DeviceFor(device);
  dev.sessions.push_back(id);
  Recompute(dev);
  Reschedule(device);
  return id;
}

bool ContentionEngine::Extend(SessionId id, uint64_t more_bytes) {
  const FpgaId device = ActiveFor(id).s.device_id;
  Sync(device, static_cast<double>(ToMicros(loop_.Now())));
  auto it = active_.find(id);
  if (it == active_.end()) return false;
  it->second.s.total_bytes += more_bytes;
  Reschedule(device);
  return true;
}

void ContentionEngine::Watch(SessionId id, uint64_t threshold, Callback cb) {
  if (!IsActive(id)) {
    if (BytesDone(id) + kByteEpsilon >= static_cast<double>(threshold)) Defer(std::move(cb));
    return;
  }
  const FpgaId device = active_.at(id).s.device_id;
  Sync(device, static_cast<double>(ToMicros(loop_.Now())));
  auto it = active_.find(id);
  if (it == active_.end()) {
    if (BytesDone(id) + kByteEpsilon >= static_cast<double>(threshold)) Defer(std::move(cb));
    return;
  }
  if (it->second.s.bytes_done + kByteEpsilon >= static_cast<double>(threshold)) {
    Defer(std::move(cb));
    return;
  }
  it->second.watches.emplace(static_cast<double>(threshold), std::move(cb));
  Reschedule(device);
}

void ContentionEngine::Close(SessionId id) {
  auto it = active_.find(id);
  if (it == active_.end()) return;
  const FpgaId device = it->second.s.device_id;
  Sync(device, static_cast<double>(ToMicros(loop_.Now())));
  it = active_.find(id);
  if (it == active_.end()) return;
  ended_.emplace(id, Ended{it->second.s, std::nullopt});
  active_.erase(it);
  Device &dev = DeviceFor(device);
  std::erase(dev.sessions, id);
  Recompute(dev);
  Reschedule(device);
}

bool ContentionEngine::IsActive(SessionId id) const { return active_.count(id) != 0; }

double ContentionEngine::BytesDone(SessionId id) const {
  return Snapshot(id).bytes_done;
}

StreamSession ContentionEngine::Snapshot(SessionId id) const {
  if (auto it = active_.find(id); it != active_.end()) {
    StreamSession s = it->second.s;
    const Device &dev = devices_.at(s.device_id);
    const double now_us = static_cast<double>(ToMicros(loop_.Now()));
    // Rates are constant between crossings, so extrapolate from the last sync.
    s.bytes_done = std::min(static_cast<double>(s.total_bytes),
                            s.bytes_done + s.rate_now * std::max(0.0, now_us - dev.clock_us));
    return s;
  }
  if (auto it = ended_.find(id); it != ended_.end()) return it->second.s;
  throw Error(ErrorCode::kInvalidArgument, "unknown stream session " + std::to_string(id));
}

std::vector<StreamSession> ContentionEngine::Sessions(FpgaId device) const {
  std::vector<StreamSession> out;
  auto it = devices_.find(device);
  if (it == devices_.end()) return out;
  for (SessionId id : it->second.sessions) out.push_back(Snapshot(id));
  return out;
}

std::optional<double> ContentionEngine::CompletionMicros(SessionId id) const {
  auto it = ended_.find(id);
  if (it == ended_.end()) return std::nullopt;
  return it->second.completed_at_us;
}

SimTime ContentionEngine::RunTransfer(SessionId id) {
  return loop_.AdvanceUntil([&] { return !IsActive(id); });
}

double ContentionEngine::NextThreshold(const Active &a) const {
  const double total = static_cast<double>(a.s.total_bytes);
  if (!a.watches.empty()) return std::min(a.watches.begin()->first, total);
  return total;
}

void ContentionEngine::Recompute(Device &dev) {
  std::vector<double> caps;
  caps.reserve(dev.sessions.size());
  for (SessionId id : dev.sessions) caps.push_back(active_.at(id).s.compute_cap);
  const std::vector<double> rates = ContendedRates(caps, dev.link);
  for (size_t i = 0; i < dev.sessions.size(); ++i) active_.at(dev.sessions[i]).s.rate_now = rates[i];
}

void ContentionEngine::Sync(FpgaId device, double target_us) {
  Device &dev = DeviceFor(device);
  std::vector<double> crossing;
  while (true) {
    if (dev.sessions.empty()) {
      dev.clock_us = std::max(dev.clock_us, target_us);
      return;
    }
    crossing.clear();
    double t_min = std::numeric_limits<double>::infinity();
    for (SessionId id : dev.sessions) {
      const Active &a = active_.at(id);
      crossing.push_back(dev.clock_us +
                         std::max(0.0, NextThreshold(a) - a.s.bytes_done) / a.s.rate_now);
      t_min = std::min(t_min, crossing.back());
    }
    const double until = std::min(t_min, target_us);
    const double dt = std::max(0.0, until - dev.clock_us);
    for (SessionId id : dev.sessions) {
      Active &a = active_.at(id);
      a.s.bytes_done = std::min(static_cast<double>(a.s.total_bytes),
                                a.s.bytes_done + a.s.rate_now * dt);
    }
    dev.clock_us = std::max(dev.clock_us, until);
    if (t_min > target_us) return;

    // Settle every session whose next threshold falls on t_min.
    const double slack = 1e-9 * std::max(1.0, t_min);
    std::vector<SessionId> finished;
    for (size_t i = 0; i < dev.sessions.size(); ++i) {
      if (crossing[i] > t_min + slack) continue;
      Active &a = active_.at(dev.sessions[i]);
      a.s.bytes_done = std::max(a.s.bytes_done, NextThreshold(a));
      while (!a.watches.empty() && a.watches.begin()->first <= a.s.bytes_done + kByteEpsilon) {
        Defer(std::move(a.watches.begin()->second));
        a.watches.erase(a.watches.begin());
      }
      if (a.s.bytes_done + kByteEpsilon >= static_cast<double>(a.s.total_bytes)) {
        a.s.bytes_done = static_cast<double>(a.s.total_bytes);
        finished.push_back(dev.sessions[i]);
      }
    }
    for (SessionId id : finished) {
      Active &a = active_.at(id);
      a.s.rate_now = 0.0;
      ended_.emplace(id, Ended{a.s, dev.clock_us});
      Defer(std::move(a.on_complete));
      active_.erase(id);
      std::erase(dev.sessions, id);
    }
    Recompute(dev);
  }
}

void ContentionEngine::Reschedule(FpgaId device) {
  Device &dev = DeviceFor(device);
  if (dev.pending) {
    loop_.Cancel(*dev.pending);
    dev.pending.reset();
  }
  if (dev.sessions.empty()) return;
  double t_min = std::numeric_limits<double>::infinity();
  for (SessionId id : dev.sessions) {
    const Active &a = active_.at(id);
    t_min = std::min(t_min, dev.clock_us + (NextThreshold(a) - a.s.bytes_done) / a.s.rate_now);
  }
  const int64_t now_us = ToMicros(loop_.Now());
  const int64_t fire_us = std::max(now_us, static_cast<int64_t>(std::ceil(t_min)));
  dev.pending = loop_.Schedule(SimDuration{fire_us - now_us}, [this, device] {
    devices_.at(device).pending.reset();
    Sync(device, static_cast<double>(ToMicros(loop_.Now())));
    Reschedule(device);
  });
}

}  // namespace rc3e
