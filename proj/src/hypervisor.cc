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

#include "rc3e/hypervisor.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "rc3e/rc2f.h"

namespace rc3e {

using nlohmann::json;

const char *ToString(ServiceModel m) {
  switch (m) {
    case ServiceModel::kRSaaS: return "rsaas";
    case ServiceModel::kRAaaS: return "raaas";
    case ServiceModel::kBAaaS: return "baaas";
  }
  return "?";
}

ServiceModel ParseServiceModel(const std::string &name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
  if (lower == "rsaas") return ServiceModel::kRSaaS;
  if (lower == "raaas") return ServiceModel::kRAaaS;
  if (lower == "baaas") return ServiceModel::kBAaaS;
  throw Error(ErrorCode::kInvalidArgument, "service model must be rsaas, raaas or baaas");
}

Hypervisor::Hypervisor(Fleet fleet, LatencyTable latency)
    : fleet_(std::move(fleet)),
      latency_(latency),
      engine_(loop_),
      runtime_(std::make_unique<rc2f::Runtime>(*this)) {
  latency_.Validate();
  fleet_.CheckInvariants();
  for (const auto &f : fleet_.fpgas()) {
    engine_.SetLinkBandwidth(f.id, f.model.link_bandwidth);
    // Leases do not survive a restart; a database saved with live leases is
    // brought back to an idle fleet.
    if (f.HasAllocations()) {
      PhysicalFpga &m = fleet_.mutable_fpga(f.id);
      for (auto &s : m.slots) {
        s = VSlot{s.index, s.capacity, SlotState::kFree, std::nullopt, std::nullopt};
      }
      m.full_lease_id.reset();
      m.RefreshPower();
    }
  }
  for (uint32_t n : {16u, 32u}) RegisterService("matmul" + std::to_string(n), MatmulBitfile(n));
  RegisterService("loopback", LoopbackBitfile());
}

Hypervisor::~Hypervisor() = default;

void Hypervisor::Charge(SimDuration d) { loop_.AdvanceBy(d); }

// ---------------------------------------------------------------------------
// Leases

std::variant<Hypervisor::Placement, ErrorCode> Hypervisor::FindPlacement(ServiceModel model,
                                                                         LeaseSize size) const {
  const auto &fpgas = fleet_.fpgas();
  if (size.whole_device) {
    if (model != ServiceModel::kRSaaS) return ErrorCode::kWrongServiceModel;
    for (const auto &f : fpgas) {
      if (!f.HasAllocations()) return Placement{f.id, 0};
    }
    const bool held_by_slots = std::any_of(fpgas.begin(), fpgas.end(), [](const PhysicalFpga &f) {
      return f.mode == DeviceMode::kFramework && f.HasAllocations();
    });
    return held_by_slots ? ErrorCode::kModelConflict : ErrorCode::kNoCapacity;
  }

  if (model == ServiceModel::kRSaaS) return ErrorCode::kWrongServiceModel;

  // Best fit among active framework devices: fewest free slots, lowest id.
  const PhysicalFpga *best = nullptr;
  int best_start = 0;
  for (const auto &f : fpgas) {
    if (f.power != PowerState::kActive || f.mode != DeviceMode::kFramework) continue;
    auto start = f.FindFreeSpan(size.slots);
    if (!start) continue;
    if (best == nullptr || f.FreeSlotCount() < best->FreeSlotCount()) {
      best = &f;
      best_start = *start;
    }
  }
  if (best != nullptr) return Placement{best->id, best_start};

  for (const auto &f : fpgas) {
    if (f.HasAllocations()) continue;
    if (auto start = f.FindFreeSpan(size.slots)) return Placement{f.id, *start};
  }
  const bool held_whole = std::any_of(fpgas.begin(), fpgas.end(), [&](const PhysicalFpga &f) {
    return f.mode == DeviceMode::kFullAccess && f.model.slot_count >= size.slots;
  });
  return held_whole ? ErrorCode::kModelConflict : ErrorCode::kNoCapacity;
}

Lease Hypervisor::CommitPlacement(const std::string &user, ServiceModel model, LeaseSize size,
                                  const Placement &p, bool managed) {
  PhysicalFpga &f = fleet_.mutable_fpga(p.device);
  const bool woke = f.power == PowerState::kClockGated;

  Lease lease;
  lease.id = next_lease_id_++;
  lease.user = user;
  lease.model = model;
  lease.target.device_id = f.id;
  lease.created_at = loop_.Now();
  lease.managed = managed;

  if (size.whole_device) {
    f.mode = DeviceMode::kFullAccess;
    f.full_lease_id = lease.id;
  } else {
    f.mode = DeviceMode::kFramework;
    for (int i = p.first_slot; i < p.first_slot + size.slots; ++i) {
      f.slots[i].state = SlotState::kAllocated;
      f.slots[i].lease_id = lease.id;
      lease.target.slot_indices.push_back(i);
    }
  }
  f.RefreshPower();
  placement_log_.push_back({lease.id, f.id, size, model, woke, loop_.Now()});
  leases_.emplace(lease.id, lease);
  return lease;
}

Lease Hypervisor::Allocate(const std::string &user, ServiceModel model, LeaseSize size) {
  if (user.empty()) throw Error(ErrorCode::kInvalidArgument, "user must be nonempty");
  if (!size.whole_device && size.slots != 1 && size.slots != 2 && size.slots != 4) {
    throw Error(ErrorCode::kInvalidArgument, "vFPGA size must be 1, 2 or 4 slots");
  }
  if ((model == ServiceModel::kRSaaS) != size.whole_device) {
    throw Error(ErrorCode::kWrongServiceModel,
                "rsaas leases whole devices; raaas and baaas lease slots");
  }
  auto placement = FindPlacement(model, size);
  if (auto *code = std::get_if<ErrorCode>(&placement)) {
    throw Error(*code, *code == ErrorCode::kModelConflict
                           ? "the remaining devices are held under another service model"
                           : "no device can satisfy the request");
  }
  return CommitPlacement(user, model, size, std::get<Placement>(placement), false);
}

const Lease *Hypervisor::FindLease(LeaseId id) const {
  auto it = leases_.find(id);
  return it == leases_.end() ? nullptr : &it->second;
}

const Lease &Hypervisor::UserLease(const std::string &user, LeaseId id) const {
  const Lease *lease = FindLease(id);
  if (lease == nullptr) throw Error(ErrorCode::kUnknownLease, "no lease " + std::to_string(id));
  if (lease->user != user || lease->managed) {
    throw Error(ErrorCode::kPermissionDenied, "lease " + std::to_string(id) + " is not yours");
  }
  return *lease;
}

Lease &Hypervisor::MutableUserLease(const std::string &user, LeaseId id) {
  UserLease(user, id);
  return leases_.at(id);
}

std::vector<Lease> Hypervisor::Leases(const std::string &user) const {
  std::vector<Lease> out;
  for (const auto &[id, lease] : leases_) {
    if (user.empty() || lease.user == user) out.push_back(lease);
  }
  return out;
}

void Hypervisor::ReleaseLease(LeaseId id) {
  const Lease lease = leases_.at(id);
  PhysicalFpga &f = fleet_.mutable_fpga(lease.target.device_id);
  if (lease.target.whole_device()) {
    f.full_lease_id.reset();
    f.full_design.reset();
    std::vector<int> all;
    for (const auto &s : f.slots) all.push_back(s.index);
    runtime_->OnReleased(f.id, all);
  } else {
    for (int i : lease.target.slot_indices) {
      f.slots[i] = VSlot{i, f.slots[i].capacity, SlotState::kFree, std::nullopt, std::nullopt};
    }
    runtime_->OnReleased(f.id, lease.target.slot_indices);
  }
  f.RefreshPower();
  leases_.erase(id);
  ScanQueue();
}

void Hypervisor::Release(const std::string &user, LeaseId lease_id) {
  UserLease(user, lease_id);
  ReleaseLease(lease_id);
}

// ---------------------------------------------------------------------------
// Configuration and status

void Hypervisor::ValidateForLease(const Lease &lease, const Bitfile &bitfile) const {
  bitfile.ValidateDescriptor();
  const PhysicalFpga &f = fleet_.fpga(lease.target.device_id);
  if (bitfile.target_model != f.model.name) {
    throw Error(ErrorCode::kInvalidBitfile, bitfile.name + " targets " + bitfile.target_model +
                                                ", device is " + f.model.name);
  }
  if (bitfile.kind == BitfileKind::kFull) {
    if (lease.model != ServiceModel::kRSaaS) {
      throw Error(ErrorCode::kWrongServiceModel, "full bitfiles need a full-device (rsaas) lease");
    }
  } else {
    if (lease.target.whole_device()) {
      throw Error(ErrorCode::kWrongServiceModel, "partial bitfiles need a vFPGA lease");
    }
    if (bitfile.region_span != static_cast<int>(lease.target.slot_indices.size())) {
      throw Error(ErrorCode::kRegionMismatch,
                  bitfile.name + " spans " + std::to_string(bitfile.region_span) +
                      " regions, lease holds " +
                      std::to_string(lease.target.slot_indices.size()));
    }
  }
  bitfile.ValidateFootprint(f.model);
}

void Hypervisor::ApplyConfiguration(const Lease &lease, const Bitfile &bitfile) {
  PhysicalFpga &f = fleet_.mutable_fpga(lease.target.device_id);
  if (bitfile.kind == BitfileKind::kFull) {
    f.full_design = DesignRef{bitfile.name, bitfile.footprint};
    runtime_->OnConfigured(f.id, 0, 1, bitfile.Binding());
    return;
  }
  // Spread the footprint over the span; no share exceeds ceil(total / span).
  const auto &slots = lease.target.slot_indices;
  const int64_t span = static_cast<int64_t>(slots.size());
  auto share = [&](int64_t total, int64_t k) { return total / span + (k < total % span ? 1 : 0); };
  for (int64_t k = 0; k < span; ++k) {
    VSlot &s = f.slots[slots[k]];
    s.state = SlotState::kConfigured;
    s.design = DesignRef{bitfile.name,
                         {share(bitfile.footprint.lut, k), share(bitfile.footprint.ff, k),
                          share(bitfile.footprint.dsp, k), share(bitfile.footprint.bram36, k)}};
  }
  runtime_->OnConfigured(f.id, slots.front(), static_cast<int>(span), bitfile.Binding());
}

ConfigureReceipt Hypervisor::Configure(const std::string &user, LeaseId lease_id,
                                       const Bitfile &bitfile, Locality path) {
  const Lease &lease = UserLease(user, lease_id);
  ValidateForLease(lease, bitfile);
  ApplyConfiguration(lease, bitfile);

  ConfigureReceipt r;
  r.lease_id = lease_id;
  r.kind = bitfile.kind;
  r.path = path;
  r.pcie_link_restored = bitfile.kind == BitfileKind::kFull;
  r.duration = latency_.Charge(bitfile.kind == BitfileKind::kFull ? LatencyKind::kConfigFull
                                                                  : LatencyKind::kPartialReconfig,
                               path);
  Charge(r.duration);
  r.effective_at = loop_.Now();
  return r;
}

StatusReport Hypervisor::DeviceStatus(const std::string &user, LeaseId lease_id, Locality path) {
  const Lease &lease = UserLease(user, lease_id);
  const PhysicalFpga &f = fleet_.fpga(lease.target.device_id);
  StatusReport r;
  r.lease_id = lease_id;
  r.device_id = f.id;
  r.power = f.power;
  r.mode = f.mode;
  for (const auto &s : f.slots) {
    const bool mine = lease.target.whole_device() ||
                      std::find(lease.target.slot_indices.begin(), lease.target.slot_indices.end(),
                                s.index) != lease.target.slot_indices.end();
    if (!mine) continue;
    SlotStatus st{s.index, s.state, std::nullopt};
    if (s.design) st.design = s.design->bitfile;
    r.slots.push_back(st);
  }
  if (f.full_design) r.full_design = f.full_design->bitfile;
  r.latency = latency_.Charge(LatencyKind::kStatus, path);
  Charge(r.latency);
  r.at = loop_.Now();
  return r;
}

// ---------------------------------------------------------------------------
// Batch system

void Hypervisor::ValidateJobBitfile(const LeaseRequest &request, const Bitfile &bitfile) const {
  try {
    bitfile.ValidateDescriptor();
    const bool full = bitfile.kind == BitfileKind::kFull;
    if (full != (request.model == ServiceModel::kRSaaS) || full != request.size.whole_device) {
      throw Error(ErrorCode::kInvalidBitfile,
                  "full bitfiles run on rsaas whole-device leases, partial ones on vFPGAs");
    }
    if (!full && bitfile.region_span != request.size.slots) {
      throw Error(ErrorCode::kInvalidBitfile, "region_span does not match the requested size");
    }
    bool any_model = false;
    for (const auto &f : fleet_.fpgas()) {
      if (f.model.name != bitfile.target_model) continue;
      if (!full && f.model.slot_count < bitfile.region_span) continue;
      any_model = true;
      bitfile.ValidateFootprint(f.model);
      return;
    }
    if (!any_model) {
      throw Error(ErrorCode::kInvalidBitfile, "no device of model " + bitfile.target_model);
    }
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kInvalidBitfile) throw;
    throw Error(ErrorCode::kInvalidBitfile, e.what());
  }
}

JobId Hypervisor::SubmitJob(const std::string &user, LeaseRequest request, const Bitfile &bitfile,
                            std::vector<uint8_t> input, std::string input_ref,
                            std::string output_ref) {
  if (user.empty()) throw Error(ErrorCode::kInvalidArgument, "user must be nonempty");
  ValidateJobBitfile(request, bitfile);

  BatchJob job;
  job.id = next_job_id_++;
  job.user = user;
  job.request = request;
  job.bitfile = bitfile;
  job.input_ref = std::move(input_ref);
  job.output_ref = std::move(output_ref);
  job.submit_time = loop_.Now();
  job.input_bytes = input.size();
  const JobId id = job.id;
  jobs_.emplace(id, std::move(job));
  job_inputs_.emplace(id, std::move(input));
  queue_.push_back(id);
  ScanQueue();
  return id;
}

void Hypervisor::ScanQueue() {
  if (scanning_) return;
  scanning_ = true;
  // Oldest first; a job that does not fit yet stays queued without holding
  // back later jobs that do.
  for (auto it = queue_.begin(); it != queue_.end();) {
    BatchJob &job = jobs_.at(*it);
    auto placement = FindPlacement(job.request.model, job.request.size);
    if (auto *code = std::get_if<ErrorCode>(&placement)) {
      if (*code == ErrorCode::kNoCapacity || *code == ErrorCode::kModelConflict) {
        ++it;
        continue;
      }
      // The request can never be placed.
      it = queue_.erase(it);
      job.state = JobState::kFailed;
      job.error = std::string(ErrorCodeName(*code));
      job.end_time = loop_.Now();
      job_inputs_.erase(job.id);
      continue;
    }
    it = queue_.erase(it);
    StartJob(job, std::get<Placement>(placement));
  }
  scanning_ = false;
}

void Hypervisor::StartJob(BatchJob &job, const Placement &p) {
  const Lease lease = CommitPlacement(job.user, job.request.model, job.request.size, p, true);
  job.state = JobState::kRunning;
  job.start_time = loop_.Now();
  job.lease_id = lease.id;
  ApplyConfiguration(lease, job.bitfile);
  const SimDuration reconfig = latency_.Charge(job.bitfile.kind == BitfileKind::kFull
                                                   ? LatencyKind::kConfigFull
                                                   : LatencyKind::kPartialReconfig,
                                               Locality::kRemote);
  const JobId id = job.id;
  loop_.Schedule(reconfig, [this, id] { RunJobStream(id); });
}

void Hypervisor::RunJobStream(JobId id) {
  BatchJob &job = jobs_.at(id);
  const Lease &lease = leases_.at(*job.lease_id);
  const FpgaId device = lease.target.device_id;
  const int head = lease.target.whole_device() ? 0 : lease.target.slot_indices.front();
  runtime_->StartInternal(device, head);
  std::vector<uint8_t> input = std::move(job_inputs_.at(id));
  job_inputs_.erase(id);
  auto session = runtime_->FeedInternal(device, head, input);
  auto done = [this, id, device, head] {
    BatchJob &j = jobs_.at(id);
    std::string error;
    try {
      runtime_->FinishInternal(device, head);
      j.output = runtime_->DrainInternal(device, head);
      if (!j.output_ref.empty()) {
        std::ofstream out(j.output_ref, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char *>(j.output.data()),
                  static_cast<std::streamsize>(j.output.size()));
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + j.output_ref);
      }
    } catch (const Error &e) {
      error = std::string(e.code_name()) + ": " + e.what();
    }
    FinishJob(id, error);
  };
  if (!session) {
    loop_.Schedule(SimDuration::zero(), done);
    return;
  }
  engine_.Watch(*session, engine_.Snapshot(*session).total_bytes, done);
}

void Hypervisor::FinishJob(JobId id, const std::string &error) {
  BatchJob &job = jobs_.at(id);
  job.state = error.empty() ? JobState::kDone : JobState::kFailed;
  job.error = error;
  job.end_time = loop_.Now();
  if (job.lease_id && leases_.count(*job.lease_id)) ReleaseLease(*job.lease_id);
}

std::vector<const BatchJob *> Hypervisor::Jobs(const std::string &user) const {
  std::vector<const BatchJob *> out;
  for (const auto &[id, job] : jobs_) {
    if (user.empty() || job.user == user) out.push_back(&job);
  }
  return out;
}

const BatchJob &Hypervisor::Job(JobId id) const {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kUnknownJob, "no job " + std::to_string(id));
  return it->second;
}

void Hypervisor::WaitForJobs() {
  auto running = [&] {
    return std::any_of(jobs_.begin(), jobs_.end(),
                       [](const auto &kv) { return kv.second.state == JobState::kRunning; });
  };
  while (running() && loop_.RunNext()) {
  }
}

// ---------------------------------------------------------------------------
// Background acceleration

void Hypervisor::RegisterService(const std::string &name, const Bitfile &bitfile) {
  bitfile.ValidateDescriptor();
  if (bitfile.kind != BitfileKind::kPartial) {
    throw Error(ErrorCode::kInvalidBitfile, "services run partial designs");
  }
  services_[name] = bitfile;
}

std::vector<std::string> Hypervisor::Services() const {
  std::vector<std::string> names;
  for (const auto &[name, b] : services_) names.push_back(name);
  return names;
}

const Bitfile *Hypervisor::FindService(const std::string &name) const {
  auto it = services_.find(name);
  return it == services_.end() ? nullptr : &it->second;
}

ServiceResult Hypervisor::InvokeService(const std::string &user, const std::string &service,
                                        std::span<const uint8_t> input, Locality path) {
  auto it = services_.find(service);
  if (it == services_.end()) throw Error(ErrorCode::kUnknownService, "no service " + service);
  const Bitfile &bitfile = it->second;
  const LeaseSize size = LeaseSize::Slots(bitfile.region_span);

  ServiceResult result;
  result.started = loop_.Now();
  auto placement = FindPlacement(ServiceModel::kBAaaS, size);
  if (auto *code = std::get_if<ErrorCode>(&placement)) {
    throw Error(*code, "no vFPGA available for service " + service);
  }
  const Lease lease =
      CommitPlacement(user, ServiceModel::kBAaaS, size, std::get<Placement>(placement), true);
  try {
    ValidateForLease(lease, bitfile);
    ApplyConfiguration(lease, bitfile);
    Charge(latency_.Charge(LatencyKind::kPartialReconfig, path));
    const FpgaId device = lease.target.device_id;
    const int head = lease.target.slot_indices.front();
    runtime_->StartInternal(device, head);
    if (auto session = runtime_->FeedInternal(device, head, input)) engine_.RunTransfer(*session);
    runtime_->FinishInternal(device, head);
    result.output = runtime_->DrainInternal(device, head);
  } catch (...) {
    ReleaseLease(lease.id);
    throw;
  }
  ReleaseLease(lease.id);
  result.finished = loop_.Now();
  return result;
}

// ---------------------------------------------------------------------------
// Introspection

std::string Hypervisor::StateDigest() const {
  json leases = json::array();
  for (const auto &[id, l] : leases_) {
    leases.push_back({id, l.user, ToString(l.model), l.target.device_id, l.target.slot_indices,
                      l.managed});
  }
  json jobs = json::array();
  for (const auto &[id, j] : jobs_) {
    jobs.push_back({id, j.user, j.state, j.lease_id ? json(*j.lease_id) : json(nullptr),
                    j.output.size()});
  }
  const std::string doc = json{{"fleet", fleet_.ToJson()}, {"leases", leases}, {"jobs", jobs}}.dump();
  std::ostringstream os;
  os << std::hex << std::hash<std::string>{}(doc);
  return os.str();
}

void Hypervisor::CheckInvariants() const {
  fleet_.CheckInvariants();
  for (const auto &f : fleet_.fpgas()) {
    if (f.full_lease_id && f.ActiveVfpgaCount() > 0) {
      throw Error(ErrorCode::kInternal, "device holds both a full-device and a slot lease");
    }
    for (const auto &s : f.slots) {
      if (!s.lease_id) continue;
      auto it = leases_.find(*s.lease_id);
      if (it == leases_.end() || it->second.target.device_id != f.id) {
        throw Error(ErrorCode::kInternal, "slot points at a foreign or dead lease");
      }
      const auto &idx = it->second.target.slot_indices;
      if (std::find(idx.begin(), idx.end(), s.index) == idx.end()) {
        throw Error(ErrorCode::kInternal, "slot is not part of its lease");
      }
    }
  }
  for (const auto &[id, l] : leases_) {
    const PhysicalFpga &f = fleet_.fpga(l.target.device_id);
    if (l.target.whole_device()) {
      if (f.full_lease_id != id) throw Error(ErrorCode::kInternal, "full lease not on device");
      continue;
    }
    for (int i : l.target.slot_indices) {
      if (f.slots.at(i).lease_id != id) throw Error(ErrorCode::kInternal, "slot double-booked");
    }
  }
}

}  // namespace rc3e
