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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fluid_oracle.h"
#include "json.hpp"
#include "matmul_ref.h"
#include "rc3e/bitfile.h"
#include "rc3e/hypervisor.h"
#include "rc3e/kernels.h"
#include "rc3e/middleware.h"
#include "rc3e/rc2f.h"

namespace rc3e {
namespace {

using nlohmann::json;

// Tolerances.
constexpr double kContentionRelTol = 0.03;
constexpr double kExactRateRelTol = 1e-3;
constexpr double kWallSeconds = 1.0;
constexpr double kUtilizationTol = 0.1 + 1e-9;
constexpr double kMatmulRelTol = 1e-5;
constexpr double kFluidRelTol = 1e-4;

constexpr int kFramesPerCore = 10'000;
constexpr int kMatmulPairs = 1000;
constexpr int kPlacementSequences = 10'000;
constexpr int kPlacementOpsPerSequence = 24;
constexpr int kFluidInstances = 500;
constexpr int kBatchStreams = 200;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Check(bool ok, const std::string &what) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

bool Within(double actual, double expected, double rel) {
  return std::abs(actual - expected) <= rel * std::abs(expected);
}

std::string Fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

/// Leases `cores` single regions, loads `bitfile` in each and streams
/// `input` through every core at once. Returns per-core MB/s.
std::vector<double> StreamConcurrently(const Bitfile &bitfile, int cores,
                                       const std::vector<uint8_t> &input, bool loopback_mode,
                                       bool *same_device) {
  Hypervisor hv(DefaultFleet());
  std::vector<rc2f::DeviceHandle> handles;
  std::vector<int> slots;
  std::set<FpgaId> devices;
  for (int i = 0; i < cores; ++i) {
    const Lease lease = hv.Allocate("bench", ServiceModel::kRAaaS, LeaseSize::Slots(1));
    hv.Configure("bench", lease.id, bitfile);
    handles.push_back(hv.runtime().OpenDevice("bench", lease.id));
    slots.push_back(lease.target.slot_indices[0]);
    devices.insert(lease.target.device_id);
  }
  *same_device = devices.size() == 1;
  for (int i = 0; i < cores; ++i) {
    if (loopback_mode) {
      hv.runtime().Control(handles[i], rc2f::ControlSignal::kTestLoopback, slots[i]);
    } else {
      hv.runtime().KernelStart(handles[i], slots[i]);
    }
  }
  const SimTime t0 = hv.loop().Now();
  for (int i = 0; i < cores; ++i) {
    hv.runtime().FifoWrite(handles[i], {handles[i].device, slots[i], rc2f::EndpointKind::kIn},
                           input);
  }
  std::vector<double> rates;
  for (int i = 0; i < cores; ++i) {
    hv.runtime().FifoRead(handles[i], {handles[i].device, slots[i], rc2f::EndpointKind::kOut});
    const double us = static_cast<double>(ToMicros(hv.loop().Now() - t0));
    rates.push_back(static_cast<double>(input.size()) / us);
  }
  return rates;
}

// 1. Per-core throughput under link sharing.
Outcome ContentionThroughput() {
  Outcome o;
  struct Row {
    uint32_t n;
    int cores;
    double reported;
    double tol;
  };
  const Row rows[] = {{16, 1, 509, kExactRateRelTol},
                      {16, 2, 398, kContentionRelTol},
                      {16, 4, 198, kContentionRelTol},
                      {32, 1, 279, kExactRateRelTol},
                      {32, 2, 277, kContentionRelTol}};
  const std::map<uint32_t, std::vector<uint8_t>> inputs = {
      {16, GenerateMatrixBatch(16, kFramesPerCore, 7)},
      {32, GenerateMatrixBatch(32, kFramesPerCore, 7)}};
  double wall = 0.0;
  std::ostringstream got;
  for (const Row &r : rows) {
    bool same = false;
    const auto start = std::chrono::steady_clock::now();
    const auto rates =
        StreamConcurrently(MatmulBitfile(r.n), r.cores, inputs.at(r.n), false, &same);
    wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.Check(same, "cores of " + std::to_string(r.cores) + "x" + std::to_string(r.n) +
                      " not on one device");
    for (double rate : rates) {
      o.Check(Within(rate, r.reported, r.tol), std::to_string(r.cores) + "x" + std::to_string(r.n) +
                                                " core at " + Fmt(rate) + " MB/s, want " +
                                                Fmt(r.reported, 0));
    }
    got << r.cores << "x" << r.n << "=" << Fmt(rates.front(), 1) << " ";
  }
  o.Check(wall < kWallSeconds, "wall time " + Fmt(wall, 3) + " s");
  if (o.pass) o.detail << got.str() << "MB/s, wall " << Fmt(wall, 3) << " s";
  return o;
}

// 2. Uncapped loopback shares the link evenly.
Outcome FifoCeiling() {
  Outcome o;
  const std::pair<int, double> rows[] = {{1, 798}, {2, 397}, {4, 196}};
  std::ostringstream got;
  for (const auto &[cores, reported] : rows) {
    bool same = false;
    const std::vector<uint8_t> input(8'000'000, 0x5a);
    const auto rates = StreamConcurrently(LoopbackBitfile(), cores, input, true, &same);
    o.Check(same, "loopback cores not on one device");
    for (double rate : rates) {
      o.Check(Within(rate, reported, kContentionRelTol),
              "N=" + std::to_string(cores) + " at " + Fmt(rate) + " MB/s, want " + Fmt(reported, 0));
    }
    got << "N=" << cores << ":" << Fmt(rates.front(), 1) << " ";
  }
  if (o.pass) o.detail << got.str() << "MB/s";
  return o;
}

// 3. Charged durations equal the fixed costs.
Outcome LatencyAccounting() {
  Outcome o;
  Hypervisor hv(DefaultFleet());
  auto charged = [&](const std::function<void()> &op) {
    const SimTime before = hv.loop().Now();
    op();
    return ToMicros(hv.loop().Now() - before);
  };
  auto expect = [&](const std::string &what, int64_t got, int64_t want) {
    o.Check(got == want, what + " charged " + std::to_string(got) + " us, want " +
                             std::to_string(want));
  };

  const Lease whole = hv.Allocate("u", ServiceModel::kRSaaS, LeaseSize::WholeDevice());
  expect("remote status", charged([&] { hv.DeviceStatus("u", whole.id, Locality::kRemote); }),
         80'000);
  expect("local status", charged([&] { hv.DeviceStatus("u", whole.id, Locality::kLocal); }),
         11'000);
  Bitfile full = MatmulBitfile(16);
  full.name = "full16";
  full.kind = BitfileKind::kFull;
  expect("remote full config",
         charged([&] { hv.Configure("u", whole.id, full, Locality::kRemote); }), 29'513'000);
  expect("local full config",
         charged([&] { hv.Configure("u", whole.id, full, Locality::kLocal); }), 28'370'000);
  const auto wh = hv.runtime().OpenDevice("u", whole.id);
  expect("gcs read", charged([&] { hv.runtime().GcsRead(wh, 0); }), 198);
  expect("gcs write", charged([&] { hv.runtime().GcsWrite(wh, 20, 1); }), 198);

  std::vector<Lease> slot_leases;
  const int64_t ucs_by_count[] = {208, 221, 273, 273};
  for (int k = 1; k <= 4; ++k) {
    slot_leases.push_back(hv.Allocate("u", ServiceModel::kRAaaS, LeaseSize::Slots(1)));
    const Lease &l = slot_leases.back();
    if (k == 1) {
      expect("remote partial config",
             charged([&] { hv.Configure("u", l.id, MatmulBitfile(16), Locality::kRemote); }),
             912'000);
      expect("local partial config",
             charged([&] { hv.Configure("u", l.id, MatmulBitfile(16), Locality::kLocal); }),
             732'000);
    }
    const auto h = hv.runtime().OpenDevice("u", slot_leases.front().id);
    const int slot = slot_leases.front().target.slot_indices[0];
    expect("ucs read with " + std::to_string(k) + " vFPGAs",
           charged([&] { hv.runtime().UcsRead(h, slot, 3); }), ucs_by_count[k - 1]);
    expect("ucs write with " + std::to_string(k) + " vFPGAs",
           charged([&] { hv.runtime().UcsWrite(h, slot, 3, 9); }), ucs_by_count[k - 1]);
  }
  if (o.pass) o.detail << "status, full, partial, gcs and ucs charges exact";
  return o;
}

// 4. Framework utilization at one decimal.
Outcome ResourceUtilization() {
  Outcome o;
  const ResourceVector capacity = Xc7vx485t().capacity;
  const std::map<int, std::array<double, 3>> reported = {
      {1, {2.3, 1.2, 1.3}}, {2, {2.6, 1.3, 1.7}}, {4, {2.8, 1.4, 2.3}}};
  std::ostringstream got;
  for (const auto &[n, want] : reported) {
    const rc2f::Utilization u = rc2f::ReportUtilization(rc2f::FrameworkFootprint(n), capacity);
    const double have[] = {u.lut, u.ff, u.bram36};
    const char *names[] = {"LUT", "FF", "BRAM"};
    for (int i = 0; i < 3; ++i) {
      o.Check(std::abs(have[i] - want[i]) <= kUtilizationTol,
              "N=" + std::to_string(n) + " " + names[i] + " " + Fmt(have[i], 1) + "%, want " +
                  Fmt(want[i], 1) + "%");
    }
    got << "N=" << n << ":" << Fmt(u.lut, 1) << "/" << Fmt(u.ff, 1) << "/" << Fmt(u.bram36, 1)
        << " ";
  }
  if (o.pass) o.detail << got.str() << "%";
  return o;
}

// 5. Matmul against a double-precision oracle; loopback byte-exact.
Outcome KernelCorrectness() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::ostringstream got;
  for (uint32_t n : {16u, 32u}) {
    const auto batch = GenerateMatrixBatch(n, kMatmulPairs, 1000 + n);
    StreamKernel kernel(Preset(n));
    std::vector<uint8_t> out;
    std::uniform_int_distribution<size_t> chunk(1, 3 * 8 * n * n);
    for (size_t pos = 0; pos < batch.size();) {
      const size_t len = std::min(chunk(rng), batch.size() - pos);
      const auto part = kernel.Step(std::span(batch).subspan(pos, len));
      out.insert(out.end(), part.begin(), part.end());
      pos += len;
    }
    const double err = testing::MaxRelativeError(batch, out, n);
    o.Check(out.size() == static_cast<size_t>(kMatmulPairs) * n * n * 4,
            "n=" + std::to_string(n) + " produced " + std::to_string(out.size()) + " bytes");
    o.Check(err <= kMatmulRelTol, "n=" + std::to_string(n) + " relative error " +
                                      std::to_string(err));
    got << "n=" << n << " err " << err << "; ";
  }

  Hypervisor hv(DefaultFleet());
  const Lease l = hv.Allocate("u", ServiceModel::kRAaaS, LeaseSize::Slots(1));
  hv.Configure("u", l.id, LoopbackBitfile());
  const auto h = hv.runtime().OpenDevice("u", l.id);
  const int slot = l.target.slot_indices[0];
  hv.runtime().KernelStart(h, slot);
  std::vector<uint8_t> data(1 << 20);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto &b : data) b = static_cast<uint8_t>(byte(rng));
  hv.runtime().FifoWrite(h, {l.target.device_id, slot, rc2f::EndpointKind::kIn}, data);
  const auto back = hv.runtime().FifoRead(h, {l.target.device_id, slot, rc2f::EndpointKind::kOut});
  o.Check(back == data, "loopback altered the stream");
  if (o.pass) o.detail << got.str() << "loopback exact over " << data.size() << " bytes";
  return o;
}

// Free contiguous run of `len` slots, scanned from scratch.
bool HasFreeRun(const PhysicalFpga &f, int len) {
  int run = 0;
  for (const auto &s : f.slots) {
    run = (s.state == SlotState::kFree && !s.lease_id) ? run + 1 : 0;
    if (run >= len) return true;
  }
  return false;
}

std::string PlacementViolation(const Hypervisor &hv) {
  std::map<std::pair<FpgaId, int>, LeaseId> owner;
  for (const Lease &l : hv.Leases()) {
    const PhysicalFpga &f = hv.fleet().fpga(l.target.device_id);
    if (l.target.whole_device()) {
      if (f.full_lease_id != l.id) return "whole lease not recorded on device";
      for (const auto &s : f.slots) {
        if (s.lease_id) return "rsaas device " + std::to_string(f.id) + " has slot leases";
      }
      continue;
    }
    if (f.full_lease_id) return "slot lease on rsaas device " + std::to_string(f.id);
    for (int idx : l.target.slot_indices) {
      if (!owner.emplace(std::make_pair(f.id, idx), l.id).second) {
        return "slot " + std::to_string(idx) + " of device " + std::to_string(f.id) +
               " double-booked";
      }
      if (f.slots[idx].lease_id != l.id) return "slot ownership out of sync";
    }
  }
  for (const auto &f : hv.fleet().fpgas()) {
    for (const auto &s : f.slots) {
      if (s.lease_id && !owner.count({f.id, s.index})) return "slot held by no lease";
    }
  }
  return {};
}

// 6. Placement policy over random allocate/release sequences.
Outcome PlacementProperties() {
  Outcome o;
  std::mt19937_64 rng(6);
  uint64_t allocations = 0, wakes = 0;
  for (int seq = 0; seq < kPlacementSequences && o.pass; ++seq) {
    Hypervisor hv(DefaultFleet());
    std::vector<LeaseId> live;
    for (int step = 0; step < kPlacementOpsPerSequence && o.pass; ++step) {
      const bool release = !live.empty() && std::bernoulli_distribution(0.4)(rng);
      if (release) {
        const size_t k = std::uniform_int_distribution<size_t>(0, live.size() - 1)(rng);
        hv.Release("u", live[k]);
        live.erase(live.begin() + static_cast<long>(k));
      } else {
        const int pick = std::uniform_int_distribution<int>(0, 9)(rng);
        const bool whole = pick == 0;
        const int slots = pick < 5 ? 1 : (pick < 8 ? 2 : 4);
        const LeaseSize size = whole ? LeaseSize::WholeDevice() : LeaseSize::Slots(slots);
        const ServiceModel model = whole ? ServiceModel::kRSaaS : ServiceModel::kRAaaS;
        bool active_fits = false;
        for (const auto &f : hv.fleet().fpgas()) {
          if (!whole && f.power == PowerState::kActive && !f.full_lease_id &&
              HasFreeRun(f, slots)) {
            active_fits = true;
          }
        }
        const size_t log_before = hv.placement_log().size();
        try {
          live.push_back(hv.Allocate("u", model, size).id);
        } catch (const Error &) {
        }
        if (hv.placement_log().size() > log_before) {
          ++allocations;
          const PlacementRecord &rec = hv.placement_log().back();
          if (rec.woke_device) ++wakes;
          o.Check(!(rec.woke_device && active_fits),
                  "sequence " + std::to_string(seq) + " woke device " +
                      std::to_string(rec.device_id) + " while an active one had room");
        } else if (!whole) {
          o.Check(!active_fits, "sequence " + std::to_string(seq) +
                                    " refused a request an active device could hold");
        }
      }
      const std::string v = PlacementViolation(hv);
      o.Check(v.empty(), "sequence " + std::to_string(seq) + ": " + v);
    }
  }
  if (o.pass) {
    o.detail << kPlacementSequences << " sequences, " << allocations << " allocations, " << wakes
             << " wakes";
  }
  return o;
}

// 7. Event-driven completions against the 1 us fluid reference.
Outcome FluidEquivalence() {
  Outcome o;
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < kFluidInstances; ++i) {
    const auto jobs = testing::RandomInstance(rng);
    const double dev = testing::MaxRelativeDeviation(
        jobs, testing::EngineCompletions(jobs, 800.0), testing::FluidStepCompletions(jobs, 800.0));
    worst = std::max(worst, dev);
    o.Check(dev <= kFluidRelTol, "instance " + std::to_string(i) + " deviates " +
                                     std::to_string(dev));
  }
  if (o.pass) o.detail << kFluidInstances << " instances, worst deviation " << worst;
  return o;
}

// 8. Allocate, configure, run and release over the wire.
Outcome WireWalkthrough() {
  Outcome o;
  ServiceConfig config;
  config.listen = "tcp://127.0.0.1:0";
  Server server(config);
  server.Start();
  Client client(server.address());
  auto ok = [&](const json &r, const std::string &what) {
    o.Check(r.value("ok", false), what + " failed: " + r.dump());
    return r.value("result", json::object());
  };

  const json alloc = client.Call("ALLOC", "walk", {{"model", "raaas"}, {"slots", 1}});
  const int64_t t0 = alloc.value("sim_time", int64_t{0});
  const json lease = ok(alloc, "ALLOC");
  const uint64_t id = lease.value("lease_id", uint64_t{0});
  const FpgaId device = lease.value("device_id", FpgaId{0});
  ok(client.Call("CONFIGURE", "walk", {{"lease_id", id}, {"bitfile", "matmul16"}}), "CONFIGURE");
  const uint64_t pairs = 1000;
  const auto batch = GenerateMatrixBatch(16, pairs, 88);
  const json script = json::array({
      {{"op", "open"}},
      {{"op", "ucs_wr"}, {"addr", 2}, {"value", 1}},
      {{"op", "kernel_start"}},
      {{"op", "put"}, {"data_b64", Base64Encode(batch)}},
      {{"op", "get"}},
      {{"op", "kernel_status"}},
      {{"op", "ucs_rd"}, {"addr", 2}},
  });
  const json exec = ok(client.Call("EXEC", "walk", {{"lease_id", id}, {"script", script}}), "EXEC");
  if (o.pass) {
    const auto out = Base64Decode(exec["results"][4]["data_b64"].get<std::string>());
    o.Check(out.size() == pairs * 16 * 16 * 4, "EXEC returned " + std::to_string(out.size()) +
                                                   " bytes");
    o.Check(testing::MaxRelativeError(batch, out, 16) <= kMatmulRelTol, "EXEC output wrong");
  }
  const json rel = client.Call("RELEASE", "walk", {{"lease_id", id}});
  ok(rel, "RELEASE");
  const int64_t elapsed = rel.value("sim_time", int64_t{0}) - t0;
  // Partial configuration, two ucs and two gcs accesses, 2,048,000 bytes at 509 MB/s.
  const int64_t want = 912'000 + 2 * 208 + 2 * 198 + 4024;
  o.Check(elapsed == want,
          "charged " + std::to_string(elapsed) + " us, want " + std::to_string(want));
  const json list = ok(client.Call("LIST", "walk"), "LIST");
  std::string power;
  for (const auto &d : list.value("devices", json::array())) {
    if (d["id"] == device) power = d["power"].get<std::string>();
  }
  o.Check(power == "clock_gated", "device " + std::to_string(device) + " left " + power);
  server.Stop();
  if (o.pass) o.detail << "elapsed " << elapsed << " us, device clock-gated";
  return o;
}

// Independent feasibility of a slot or whole-device request.
bool Placeable(const Fleet &fleet, const LeaseRequest &req) {
  for (const auto &f : fleet.fpgas()) {
    const bool idle = !f.full_lease_id && std::none_of(f.slots.begin(), f.slots.end(),
                                                       [](const VSlot &s) { return s.lease_id; });
    if (req.size.whole_device ? idle : (!f.full_lease_id && HasFreeRun(f, req.size.slots))) {
      return true;
    }
  }
  return false;
}

// 9. Submit-order starts among identical requests; nothing left waiting that fits.
Outcome BatchDiscipline() {
  Outcome o;
  std::mt19937_64 rng(9);
  uint64_t started = 0, waiting_checks = 0, overtakes = 0;
  for (int stream = 0; stream < kBatchStreams && o.pass; ++stream) {
    Hypervisor hv(DefaultFleet());
    std::vector<LeaseId> held;
    const int steps = std::uniform_int_distribution<int>(20, 60)(rng);
    for (int step = 0; step < steps && o.pass; ++step) {
      const int action = std::uniform_int_distribution<int>(0, 9)(rng);
      if (action < 5) {
        const int pairs = std::uniform_int_distribution<int>(1, 200)(rng);
        const int slots = action < 2 ? 1 : (action < 4 ? 2 : 4);
        LeaseRequest req{ServiceModel::kBAaaS, LeaseSize::Slots(slots)};
        Bitfile bf = MatmulBitfile(16);
        bf.region_span = req.size.slots;
        hv.SubmitJob("batch", req, bf, GenerateMatrixBatch(16, pairs, step));
      } else if (action < 7) {
        try {
          held.push_back(hv.Allocate("tenant", ServiceModel::kRAaaS, LeaseSize::Slots(2)).id);
        } catch (const Error &) {
        }
      } else if (action < 8 && !held.empty()) {
        hv.Release("tenant", held.back());
        held.pop_back();
      } else {
        hv.Charge(SimDuration(std::uniform_int_distribution<int64_t>(1, 2'000'000)(rng)));
      }
      for (const BatchJob *j : hv.Jobs()) {
        if (j->state != JobState::kQueued) continue;
        ++waiting_checks;
        o.Check(!Placeable(hv.fleet(), j->request),
                "stream " + std::to_string(stream) + ": job " + std::to_string(j->id) +
                    " waits although it fits");
      }
      o.Check(PlacementViolation(hv).empty(), "stream " + std::to_string(stream) + ": " +
                                                  PlacementViolation(hv));
    }
    hv.Charge(SimDuration(3'600'000'000));
    for (LeaseId l : held) hv.Release("tenant", l);
    hv.WaitForJobs();

    // Per request size: start instant and lease of the last job, which orders
    // starts that share an instant.
    std::map<int, std::tuple<SimTime, LeaseId, JobId>> last_by_size;
    std::optional<SimTime> latest;
    for (const BatchJob *j : hv.Jobs()) {
      o.Check(j->state == JobState::kDone, "job " + std::to_string(j->id) + " ended " +
                                               std::string(j->error));
      if (!j->start_time) continue;
      ++started;
      o.Check(*j->start_time >= j->submit_time, "job started before submission");
      if (latest && *j->start_time < *latest) ++overtakes;
      latest = std::max(latest.value_or(*j->start_time), *j->start_time);
      const int size = j->request.size.slots;
      auto it = last_by_size.find(size);
      if (it != last_by_size.end()) {
        const auto &[t, lease, id] = it->second;
        o.Check(std::make_pair(*j->start_time, *j->lease_id) > std::make_pair(t, lease),
                "stream " + std::to_string(stream) + ": job " + std::to_string(j->id) +
                    " started before job " + std::to_string(id));
      }
      last_by_size[size] = {*j->start_time, *j->lease_id, j->id};
    }
  }
  if (o.pass) {
    o.detail << kBatchStreams << " streams, " << started << " jobs, " << overtakes
             << " overtakes across sizes, " << waiting_checks << " waiting-job checks";
  }
  return o;
}

}  // namespace
}  // namespace rc3e

int main() {
  using rc3e::Outcome;
  struct Criterion {
    const char *name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"contention-throughput", rc3e::ContentionThroughput},
      {"fifo-ceiling", rc3e::FifoCeiling},
      {"latency-accounting", rc3e::LatencyAccounting},
      {"resource-utilization", rc3e::ResourceUtilization},
      {"kernel-correctness", rc3e::KernelCorrectness},
      {"placement-properties", rc3e::PlacementProperties},
      {"fluid-equivalence", rc3e::FluidEquivalence},
      {"wire-walkthrough", rc3e::WireWalkthrough},
      {"batch-discipline", rc3e::BatchDiscipline},
  };
  int failed = 0;
  int index = 1;
  for (const Criterion &c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail.str(std::string("exception: ") + e.what());
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, c.name,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
