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

#include "rc3e/fleet.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "rc3e/error.h"

namespace rc3e {

using nlohmann::json;

namespace {

template <typename T>
json OptionalToJson(const std::optional<T> &v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> OptionalFromJson(const json &j, const char *key) {
  const auto &v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

json DesignToJson(const std::optional<DesignRef> &d) {
  if (!d) return nullptr;
  return json{{"bitfile", d->bitfile}, {"footprint", d->footprint}};
}

std::optional<DesignRef> DesignFromJson(const json &j, const char *key) {
  const auto &v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return DesignRef{v.at("bitfile").get<std::string>(), v.at("footprint").get<ResourceVector>()};
}

[[noreturn]] void Violation(const PhysicalFpga &f, const std::string &what) {
  throw Error(ErrorCode::kInternal, "fpga " + std::to_string(f.id) + ": " + what);
}

}  // namespace

void FpgaModel::Validate() const {
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "fpga model needs a name");
  if (slot_count < 1 || slot_count > kMaxSlotsPerFpga) {
    throw Error(ErrorCode::kInvalidArgument,
                "slot_count must be in [1, 4], got " + std::to_string(slot_count));
  }
  if (!capacity.IsNonNegative() || !static_overhead.IsNonNegative()) {
    throw Error(ErrorCode::kInvalidArgument, "negative resource figure in model " + name);
  }
  if (!static_overhead.FitsWithin(capacity)) {
    throw Error(ErrorCode::kInvalidArgument, "static overhead exceeds capacity of " + name);
  }
  if (!(link_bandwidth > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "link bandwidth must be positive");
  }
}

ResourceVector FpgaModel::SlotCapacity() const {
  return capacity.CheckedSub(static_overhead).DivideFloor(slot_count);
}

FpgaModel Xc7vx485t() {
  FpgaModel m;
  m.name = "XC7VX485T";
  m.capacity = {303600, 607200, 2800, 1030};
  m.slot_count = 4;
  m.link_bandwidth = 800.0;
  // PCIe endpoint (3,268 / 3,592 / 8) + RC2F control (125 / 255 / 1).
  m.static_overhead = {3268 + 125, 3592 + 255, 0, 8 + 1};
  return m;
}

const char *ToString(SlotState s) {
  switch (s) {
    case SlotState::kFree: return "free";
    case SlotState::kAllocated: return "allocated";
    case SlotState::kConfigured: return "configured";
    case SlotState::kRunning: return "running";
  }
  return "?";
}

const char *ToString(DeviceMode m) {
  switch (m) {
    case DeviceMode::kFramework: return "framework";
    case DeviceMode::kFullAccess: return "full_access";
    case DeviceMode::kUnassigned: return "unassigned";
  }
  return "?";
}

const char *ToString(PowerState p) {
  return p == PowerState::kActive ? "active" : "clock_gated";
}

bool PhysicalFpga::HasAllocations() const {
  return full_lease_id.has_value() ||
         std::any_of(slots.begin(), slots.end(),
                     [](const VSlot &s) { return s.state != SlotState::kFree; });
}

int PhysicalFpga::FreeSlotCount() const {
  return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const VSlot &s) {
    return s.state == SlotState::kFree;
  }));
}

int PhysicalFpga::ActiveVfpgaCount() const {
  return static_cast<int>(slots.size()) - FreeSlotCount();
}

std::optional<int> PhysicalFpga::FindFreeSpan(int length) const {
  const int n = static_cast<int>(slots.size());
  for (int start = 0; start + length <= n; ++start) {
    bool free = true;
    for (int i = start; i < start + length && free; ++i) {
      free = slots[i].state == SlotState::kFree;
    }
    if (free) return start;
  }
  return std::nullopt;
}

void PhysicalFpga::RefreshPower() {
  if (HasAllocations()) {
    power = PowerState::kActive;
  } else {
    power = PowerState::kClockGated;
    mode = DeviceMode::kUnassigned;
    full_design.reset();
  }
}

ResourceVector PhysicalFpga::ConfiguredFootprint() const {
  ResourceVector sum;
  for (const auto &s : slots) {
    if (s.design) sum += s.design->footprint;
  }
  return sum;
}

NodeId Fleet::RegisterNode(const std::string &hostname) {
  if (hostname.empty()) throw Error(ErrorCode::kInvalidArgument, "hostname must be nonempty");
  for (const auto &n : nodes_) {
    if (n.hostname == hostname) {
      throw Error(ErrorCode::kDuplicateHostname, "host already registered: " + hostname);
    }
  }
  Node node;
  node.id = static_cast<NodeId>(nodes_.size());
  node.hostname = hostname;
  nodes_.push_back(node);
  return node.id;
}

FpgaId Fleet::RegisterFpga(NodeId node_id, const FpgaModel &model) {
  if (node_id >= nodes_.size()) {
    throw Error(ErrorCode::kUnknownNode, "no node " + std::to_string(node_id));
  }
  Node &node = nodes_[node_id];
  if (node.fpga_ids.size() >= kMaxFpgasPerNode) {
    throw Error(ErrorCode::kNodeFull, "node " + node.hostname + " already hosts two FPGAs");
  }
  model.Validate();

  PhysicalFpga fpga;
  fpga.id = static_cast<FpgaId>(fpgas_.size());
  fpga.node_id = node_id;
  fpga.model = model;
  const ResourceVector slot_capacity = model.SlotCapacity();
  for (int i = 0; i < model.slot_count; ++i) {
    VSlot slot;
    slot.index = i;
    slot.capacity = slot_capacity;
    fpga.slots.push_back(slot);
  }
  node.fpga_ids.push_back(fpga.id);
  fpgas_.push_back(std::move(fpga));
  return fpgas_.back().id;
}

const PhysicalFpga &Fleet::fpga(FpgaId id) const {
  if (id >= fpgas_.size()) throw Error(ErrorCode::kUnknownFpga, "no fpga " + std::to_string(id));
  return fpgas_[id];
}

PhysicalFpga &Fleet::mutable_fpga(FpgaId id) {
  if (id >= fpgas_.size()) throw Error(ErrorCode::kUnknownFpga, "no fpga " + std::to_string(id));
  return fpgas_[id];
}

void Fleet::SetLinkBandwidth(double mbps) {
  if (!(mbps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "link bandwidth must be positive");
  for (auto &f : fpgas_) f.model.link_bandwidth = mbps;
}

bool Fleet::CapacityCheck(const VSlot &slot, const ResourceVector &footprint) {
  return footprint.IsNonNegative() && footprint.FitsWithin(slot.capacity);
}

bool Fleet::CapacityCheck(const PhysicalFpga &fpga, const ResourceVector &footprint) {
  if (!footprint.IsNonNegative()) return false;
  ResourceVector used = fpga.ConfiguredFootprint();
  if (fpga.mode != DeviceMode::kFullAccess) used += fpga.model.static_overhead;
  if (!used.FitsWithin(fpga.model.capacity)) return false;
  return footprint.FitsWithin(fpga.model.capacity.CheckedSub(used));
}

void Fleet::CheckInvariants() const {
  for (const auto &n : nodes_) {
    if (n.fpga_ids.size() > kMaxFpgasPerNode) {
      throw Error(ErrorCode::kInternal, "node " + n.hostname + " has more than two FPGAs");
    }
  }
  for (const auto &f : fpgas_) {
    if (static_cast<int>(f.slots.size()) != f.model.slot_count) Violation(f, "slot count");
    std::set<LeaseId> leases;
    for (const auto &s : f.slots) {
      if ((s.state == SlotState::kFree) != !s.lease_id.has_value()) {
        Violation(f, "slot free state and lease disagree");
      }
      if (s.design && s.state != SlotState::kConfigured && s.state != SlotState::kRunning) {
        Violation(f, "design present on unconfigured slot");
      }
      if (s.design && !s.design->footprint.FitsWithin(s.capacity)) {
        // Multi-slot designs are stored as per-slot shares of the footprint.
        Violation(f, "design exceeds slot capacity");
      }
    }
    if (f.mode == DeviceMode::kFullAccess && f.FreeSlotCount() != f.model.slot_count) {
      Violation(f, "full-access device has slot allocations");
    }
    if (f.full_lease_id && f.mode != DeviceMode::kFullAccess) {
      Violation(f, "full lease without full-access mode");
    }
    const bool active = f.HasAllocations();
    if ((f.power == PowerState::kActive) != active) Violation(f, "power state disagrees");
    if (!(f.ConfiguredFootprint() + f.model.static_overhead).FitsWithin(f.model.capacity)) {
      Violation(f, "configured designs exceed device capacity");
    }
  }
}

json Fleet::ToJson() const {
  json nodes = json::array();
  for (const auto &n : nodes_) {
    nodes.push_back({{"id", n.id},
                     {"hostname", n.hostname},
                     {"fpga_ids", n.fpga_ids},
                     {"interconnect", n.interconnect}});
  }
  json fpgas = json::array();
  for (const auto &f : fpgas_) {
    json slots = json::array();
    for (const auto &s : f.slots) {
      slots.push_back({{"index", s.index},
                       {"capacity", s.capacity},
                       {"state", s.state},
                       {"lease_id", OptionalToJson(s.lease_id)},
                       {"design", DesignToJson(s.design)}});
    }
    fpgas.push_back({{"id", f.id},
                     {"node_id", f.node_id},
                     {"model", f.model},
                     {"mode", f.mode},
                     {"power", f.power},
                     {"slots", slots},
                     {"full_lease_id", OptionalToJson(f.full_lease_id)},
                     {"full_design", DesignToJson(f.full_design)}});
  }
  return json{{"schema_version", kDbSchemaVersion}, {"nodes", nodes}, {"fpgas", fpgas}};
}

namespace {

template <typename E>
E EnumFromJson(const json &j) {
  // The enum macros map unknown strings to the first entry; reject those.
  E e = j.get<E>();
  if (json(e) != j) throw Error(ErrorCode::kSchemaVersionMismatch, "bad enum value " + j.dump());
  return e;
}

}  // namespace

Fleet Fleet::FromJson(const json &doc) {
  try {
    if (!doc.is_object() || !doc.contains("schema_version") ||
        doc.at("schema_version") != kDbSchemaVersion) {
      throw Error(ErrorCode::kSchemaVersionMismatch,
                  "device database schema_version must be " + std::to_string(kDbSchemaVersion));
    }
    Fleet fleet;
    for (const auto &jn : doc.at("nodes")) {
      Node n;
      jn.at("id").get_to(n.id);
      jn.at("hostname").get_to(n.hostname);
      jn.at("fpga_ids").get_to(n.fpga_ids);
      jn.at("interconnect").get_to(n.interconnect);
      if (n.id != fleet.nodes_.size()) {
        throw Error(ErrorCode::kSchemaVersionMismatch, "node ids must be dense");
      }
      fleet.nodes_.push_back(std::move(n));
    }
    for (const auto &jf : doc.at("fpgas")) {
      PhysicalFpga f;
      jf.at("id").get_to(f.id);
      jf.at("node_id").get_to(f.node_id);
      jf.at("model").get_to(f.model);
      f.model.Validate();
      f.mode = EnumFromJson<DeviceMode>(jf.at("mode"));
      f.power = EnumFromJson<PowerState>(jf.at("power"));
      for (const auto &js : jf.at("slots")) {
        VSlot s;
        js.at("index").get_to(s.index);
        js.at("capacity").get_to(s.capacity);
        s.state = EnumFromJson<SlotState>(js.at("state"));
        s.lease_id = OptionalFromJson<LeaseId>(js, "lease_id");
        s.design = DesignFromJson(js, "design");
        f.slots.push_back(std::move(s));
      }
      f.full_lease_id = OptionalFromJson<LeaseId>(jf, "full_lease_id");
      f.full_design = DesignFromJson(jf, "full_design");
      if (f.id != fleet.fpgas_.size() || f.node_id >= fleet.nodes_.size()) {
        throw Error(ErrorCode::kSchemaVersionMismatch, "fpga ids must be dense and refer to nodes");
      }
      fleet.fpgas_.push_back(std::move(f));
    }
    fleet.CheckInvariants();
    return fleet;
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kSchemaVersionMismatch) throw;
    throw Error(ErrorCode::kSchemaVersionMismatch, std::string("device database rejected: ") + e.what());
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchemaVersionMismatch, std::string("device database rejected: ") + e.what());
  }
}

void Fleet::SaveDb(const std::filesystem::path &path) const {
  // Write-then-rename so a crash never leaves a truncated database behind.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << ToJson().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot replace " + path.string() + ": " + ec.message());
}

Fleet Fleet::LoadDb(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kSchemaVersionMismatch, path.string() + " is not valid JSON");
  }
  return FromJson(doc);
}

Fleet DefaultFleet() {
  Fleet fleet;
  for (const char *host : {"node0", "node1"}) {
    NodeId node = fleet.RegisterNode(host);
    fleet.RegisterFpga(node, Xc7vx485t());
    fleet.RegisterFpga(node, Xc7vx485t());
  }
  return fleet;
}

void to_json(json &j, const FpgaModel &m) {
  j = json{{"name", m.name},
           {"capacity", m.capacity},
           {"slot_count", m.slot_count},
           {"link_bandwidth", m.link_bandwidth},
           {"static_overhead", m.static_overhead}};
}

void from_json(const json &j, FpgaModel &m) {
  j.at("name").get_to(m.name);
  j.at("capacity").get_to(m.capacity);
  j.at("slot_count").get_to(m.slot_count);
  j.at("link_bandwidth").get_to(m.link_bandwidth);
  j.at("static_overhead").get_to(m.static_overhead);
}

}  // namespace rc3e
