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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "rc3e/contention.h"
#include "rc3e/event_loop.h"

namespace rc3e::testing {

struct FluidJob {
  FpgaId device = 0;
  int64_t arrival_us = 0;
  uint64_t bytes = 0;
  double cap = kUncapped;
};

/// Fair shares by repeated equal splitting: every round, sessions capped
/// below the current equal share are pinned at their cap and the rest of
/// the link is split again.
inline std::vector<double> EqualSplitRates(const std::vector<double> &caps, double link) {
  std::vector<double> rate(caps.size(), 0.0);
  std::vector<bool> pinned(caps.size(), false);
  double left = link;
  size_t open = caps.size();
  while (open > 0) {
    const double share = left / static_cast<double>(open);
    bool pinned_any = false;
    for (size_t i = 0; i < caps.size(); ++i) {
      if (!pinned[i] && caps[i] <= share) {
        rate[i] = caps[i];
        pinned[i] = true;
        left -= caps[i];
        --open;
        pinned_any = true;
      }
    }
    if (!pinned_any) {
      for (size_t i = 0; i < caps.size(); ++i) {
        if (!pinned[i]) rate[i] = share;
      }
      break;
    }
  }
  return rate;
}

/// Reference completion instants (µs) from a fixed 1 µs time-step fluid
/// simulation. A session finishing inside a step completes at the
/// interpolated instant and the rest of the step is re-split.
inline std::vector<double> FluidStepCompletions(const std::vector<FluidJob> &jobs, double link) {
  std::vector<double> left(jobs.size());
  std::vector<double> done_at(jobs.size(), -1.0);
  for (size_t i = 0; i < jobs.size(); ++i) {
    left[i] = static_cast<double>(jobs[i].bytes);
    if (jobs[i].bytes == 0) done_at[i] = static_cast<double>(jobs[i].arrival_us);
  }
  std::map<FpgaId, std::vector<size_t>> by_device;
  for (size_t i = 0; i < jobs.size(); ++i) by_device[jobs[i].device].push_back(i);

  auto unfinished = [&] {
    return std::any_of(done_at.begin(), done_at.end(), [](double t) { return t < 0; });
  };
  for (int64_t t = 0; unfinished(); ++t) {
    for (const auto &[device, members] : by_device) {
      double tau = 0.0;
      while (tau < 1.0) {
        std::vector<size_t> active;
        for (size_t i : members) {
          if (jobs[i].arrival_us <= t && done_at[i] < 0) active.push_back(i);
        }
        if (active.empty()) break;
        std::vector<double> caps;
        for (size_t i : active) caps.push_back(jobs[i].cap);
        const std::vector<double> rate = EqualSplitRates(caps, link);
        double dt = 1.0 - tau;
        for (size_t k = 0; k < active.size(); ++k) {
          dt = std::min(dt, left[active[k]] / rate[k]);
        }
        for (size_t k = 0; k < active.size(); ++k) {
          const size_t i = active[k];
          left[i] -= rate[k] * dt;
          if (left[i] <= 1e-9 * static_cast<double>(jobs[i].bytes)) {
            left[i] = 0.0;
            done_at[i] = static_cast<double>(t) + tau + dt;
          }
        }
        tau += dt;
      }
    }
  }
  return done_at;
}

/// Completion instants from the event-driven engine.
inline std::vector<double> EngineCompletions(const std::vector<FluidJob> &jobs, double link) {
  EventLoop loop;
  ContentionEngine engine(loop);
  std::vector<SessionId> ids(jobs.size(), 0);
  for (size_t i = 0; i < jobs.size(); ++i) {
    engine.SetLinkBandwidth(jobs[i].device, link);
    loop.Schedule(SimDuration(jobs[i].arrival_us), [&, i] {
      ids[i] = engine.Open(jobs[i].device, jobs[i].bytes, jobs[i].cap);
    });
  }
  loop.RunUntilIdle();
  std::vector<double> out;
  for (SessionId id : ids) out.push_back(engine.CompletionMicros(id).value_or(-1.0));
  return out;
}

/// Random instance: up to `max_sessions` sessions on one or two devices.
inline std::vector<FluidJob> RandomInstance(std::mt19937_64 &rng, int max_sessions = 6) {
  std::uniform_int_distribution<int> count(1, max_sessions);
  std::uniform_int_distribution<int> device(0, 1);
  std::uniform_int_distribution<int64_t> arrival(0, 20000);
  std::uniform_int_distribution<uint64_t> bytes(1'000'000, 20'000'000);
  std::uniform_real_distribution<double> cap(50.0, 900.0);
  std::bernoulli_distribution uncapped(0.25);
  std::vector<FluidJob> jobs(static_cast<size_t>(count(rng)));
  for (auto &j : jobs) {
    j.device = static_cast<FpgaId>(device(rng));
    j.arrival_us = arrival(rng);
    j.bytes = bytes(rng);
    j.cap = uncapped(rng) ? kUncapped : cap(rng);
  }
  return jobs;
}

/// Largest |engine - oracle| relative to each session's duration.
inline double MaxRelativeDeviation(const std::vector<FluidJob> &jobs,
                                   const std::vector<double> &engine,
                                   const std::vector<double> &oracle) {
  double worst = 0.0;
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (engine[i] < 0 || oracle[i] < 0) return std::numeric_limits<double>::infinity();
    const double span = std::max(1.0, oracle[i] - static_cast<double>(jobs[i].arrival_us));
    worst = std::max(worst, std::abs(engine[i] - oracle[i]) / span);
  }
  return worst;
}

}  // namespace rc3e::testing
