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

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rc3e/bitfile.h"
#include "rc3e/error.h"
#include "rc3e/contention.h"
#include "rc3e/event_loop.h"
#include "rc3e/fleet.h"
#include "rc3e/latency.h"

namespace rc3e {

namespace rc2f {
class Runtime;
}

using JobId = uint64_t;

enum class ServiceModel { kRSaaS, kRAaaS, kBAaaS };

NLOHMANN_JSON_SERIALIZE_ENUM(ServiceModel, {{ServiceModel::kRSaaS, "rsaas"},
                                            {ServiceModel::kRAaaS, "raaas"},
                                            {ServiceModel::kBAaaS, "baaas"}})

const char *ToString(ServiceModel m);
ServiceModel ParseServiceModel(const std::string &name);

/// Either a whole device (full access) or 1, 2 or 4 contiguous regions.
struct LeaseSize {
  bool whole_device = false;
  int slots = 1;

  static LeaseSize Slots(int n) { return {false, n}; }
  static LeaseSize WholeDevice() { return {true, 0}; }
  bool operator==(const LeaseSize &) const = default;
};

struct LeaseTarget {
  FpgaId device_id = 0;
  /// Empty for whole-device leases.
  std::vector<int> slot_indices;

  bool whole_device() const { return slot_indices.empty(); }
  bool operator==(const LeaseTarget &) const = default;
};

struct Lease {
  LeaseId id = 0;
  std::string user;
  ServiceModel model = ServiceModel::kRAaaS;
  LeaseTarget target;
  SimTime created_at = kSimEpoch;
  /// Held on the user's behalf by the batch system or a background service;
  /// not addressable through user commands.
  bool managed = false;
};

struct ConfigureReceipt {
  LeaseId lease_id = 0;
  BitfileKind kind = BitfileKind::kPartial;
  Locality path = Locality::kRemote;
  SimDuration duration{};
  SimTime effective_at = kSimEpoch;
  /// Full reconfiguration drops the PCIe link; the hypervisor restores the
  /// link parameters afterwards (hot-plug). The cost is part of `duration`.
  bool pcie_link_restored = false;
};

struct SlotStatus {
  int index = 0;
  SlotState state = SlotState::kFree;
  std::optional<std::string> design;
};

struct StatusReport {
  LeaseId lease_id = 0;
  FpgaId device_id = 0;
  PowerState power = PowerState::kClockGated;
  DeviceMode mode = DeviceMode::kUnassigned;
  std::vector<SlotStatus> slots;
  std::optional<std::string> full_design;
  SimDuration latency{};
  SimTime at = kSimEpoch;
};

enum class JobState { kQueued, kRunning, kDone, kFailed };

NLOHMANN_JSON_SERIALIZE_ENUM(JobState, {{JobState::kQueued, "queued"},
                                        {JobState::kRunning, "running"},
                                        {JobState::kDone, "done"},
                                        {JobState::kFailed, "failed"}})

struct LeaseRequest {
  ServiceModel model = ServiceModel::kRAaaS;
  LeaseSize size;
};

struct BatchJob {
  JobId id = 0;
  std::string user;
  LeaseRequest request;
  Bitfile bitfile;
  std::string input_ref;
  std::string output_ref;
  JobState state = JobState::kQueued;
  SimTime submit_time = kSimEpoch;
  std::optional<SimTime> start_time;
  std::optional<SimTime> end_time;
  std::optional<LeaseId> lease_id;
  std::string error;
  uint64_t input_bytes = 0;
  std::vector<uint8_t> output;
};

/// One successful allocation, in order, for post-hoc policy checks.
struct PlacementRecord {
  LeaseId lease_id = 0;
  FpgaId device_id = 0;
  LeaseSize size;
  ServiceModel model = ServiceModel::kRAaaS;
  bool woke_device = false;
  SimTime at = kSimEpoch;
};

struct ServiceResult {
  std::vector<uint8_t> output;
  SimTime started = kSimEpoch;
  SimTime finished = kSimEpoch;
};

/// The resource manager. Owns the device database, the virtual clock, the
/// link-contention engine and the on-device runtime, and applies every state
/// change. Callers must serialize access; the class is not thread-safe.
///
/// Placement packs slot leases onto the busiest active device that still has
/// a contiguous free span, so a clock-gated device is only woken when no
/// active one can take the request.
class Hypervisor {
 public:
  explicit Hypervisor(Fleet fleet, LatencyTable latency = {});
  ~Hypervisor();
  Hypervisor(const Hypervisor &) = delete;
  Hypervisor &operator=(const Hypervisor &) = delete;

  Lease Allocate(const std::string &user, ServiceModel model, LeaseSize size);
  void Release(const std::string &user, LeaseId lease_id);
  ConfigureReceipt Configure(const std::string &user, LeaseId lease_id, const Bitfile &bitfile,
                             Locality path = Locality::kRemote);
  StatusReport DeviceStatus(const std::string &user, LeaseId lease_id,
                            Locality path = Locality::kRemote);

  /// Queues a batch job. Bitfile problems are reported as kInvalidBitfile.
  JobId SubmitJob(const std::string &user, LeaseRequest request, const Bitfile &bitfile,
                  std::vector<uint8_t> input, std::string input_ref = {},
                  std::string output_ref = {});
  /// Jobs of `user`, or all jobs when `user` is empty.
  std::vector<const BatchJob *> Jobs(const std::string &user = {}) const;
  const BatchJob &Job(JobId id) const;
  /// Advances virtual time until no job is running.
  void WaitForJobs();

  /// Provider-owned catalog for background acceleration.
  void RegisterService(const std::string &name, const Bitfile &bitfile);
  std::vector<std::string> Services() const;
  const Bitfile *FindService(const std::string &name) const;
  /// Allocates, configures, streams `input` through the service's core and
  /// releases again, all on the caller's behalf.
  ServiceResult InvokeService(const std::string &user, const std::string &service,
                              std::span<const uint8_t> input, Locality path = Locality::kRemote);

  /// A lease the user may act on. Throws kUnknownLease / kPermissionDenied.
  const Lease &UserLease(const std::string &user, LeaseId id) const;
  const Lease *FindLease(LeaseId id) const;
  std::vector<Lease> Leases(const std::string &user = {}) const;

  /// Advances virtual time by `d`, running whatever falls due.
  void Charge(SimDuration d);

  const Fleet &fleet() const { return fleet_; }
  Fleet &mutable_fleet() { return fleet_; }
  EventLoop &loop() { return loop_; }
  const EventLoop &loop() const { return loop_; }
  ContentionEngine &engine() { return engine_; }
  rc2f::Runtime &runtime() { return *runtime_; }
  const LatencyTable &latency() const { return latency_; }
  const std::vector<PlacementRecord> &placement_log() const { return placement_log_; }

  /// Hash over fleet, lease and job state (not the clock).
  std::string StateDigest() const;
  /// Throws kInternal naming the first violated invariant.
  void CheckInvariants() const;

 private:
  struct Placement {
    FpgaId device = 0;
    int first_slot = 0;
  };

  // Returns the placement, or the error code explaining why there is none.
  std::variant<Placement, ErrorCode> FindPlacement(ServiceModel model, LeaseSize size) const;
  Lease CommitPlacement(const std::string &user, ServiceModel model, LeaseSize size,
                        const Placement &p, bool managed);
  void ReleaseLease(LeaseId id);
  void ValidateForLease(const Lease &lease, const Bitfile &bitfile) const;
  void ApplyConfiguration(const Lease &lease, const Bitfile &bitfile);
  Lease &MutableUserLease(const std::string &user, LeaseId id);

  void ValidateJobBitfile(const LeaseRequest &request, const Bitfile &bitfile) const;
  void ScanQueue();
  void StartJob(BatchJob &job, const Placement &p);
  void RunJobStream(JobId id);
  void FinishJob(JobId id, const std::string &error);

  Fleet fleet_;
  LatencyTable latency_;
  EventLoop loop_;
  ContentionEngine engine_;
  std::unique_ptr<rc2f::Runtime> runtime_;

  LeaseId next_lease_id_ = 1;
  std::map<LeaseId, Lease> leases_;
  std::vector<PlacementRecord> placement_log_;

  JobId next_job_id_ = 1;
  std::map<JobId, BatchJob> jobs_;
  std::map<JobId, std::vector<uint8_t>> job_inputs_;
  std::deque<JobId> queue_;
  bool scanning_ = false;

  std::map<std::string, Bitfile> services_;
};

}  // namespace rc3e
