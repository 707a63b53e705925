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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rc3e/resource_vector.h"

namespace rc3e {

using NodeId = uint32_t;
using FpgaId = uint32_t;
using LeaseId = uint64_t;

inline constexpr int kMaxSlotsPerFpga = 4;
inline constexpr int kMaxFpgasPerNode = 2;
inline constexpr int kDbSchemaVersion = 1;

struct FpgaModel {
  std::string name;
  ResourceVector capacity;
  int slot_count = kMaxSlotsPerFpga;
  /// Host link ceiling in decimal MB/s (10^6 bytes per second).
  double link_bandwidth = 800.0;
  /// PCIe endpoint plus RC2F control logic, present whenever the framework is loaded.
  ResourceVector static_overhead;

  bool operator==(const FpgaModel &) const = default;

  /// Throws kInvalidArgument when the model is not self-consistent.
  void Validate() const;
  /// Capacity of one partial-reconfiguration region under the equal split.
  ResourceVector SlotCapacity() const;
};

/// Virtex-7 XC7VX485T as found on the VC707 board. LUT/FF/BRAM totals are the
/// ones implied by the framework's reported utilization; DSP is the part's
/// datasheet count.
FpgaModel Xc7vx485t();

enum class SlotState { kFree, kAllocated, kConfigured, kRunning };
enum class DeviceMode { kFramework, kFullAccess, kUnassigned };
enum class PowerState { kClockGated, kActive };

NLOHMANN_JSON_SERIALIZE_ENUM(SlotState, {{SlotState::kFree, "free"},
                                         {SlotState::kAllocated, "allocated"},
                                         {SlotState::kConfigured, "configured"},
                                         {SlotState::kRunning, "running"}})
NLOHMANN_JSON_SERIALIZE_ENUM(DeviceMode, {{DeviceMode::kFramework, "framework"},
                                          {DeviceMode::kFullAccess, "full_access"},
                                          {DeviceMode::kUnassigned, "unassigned"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PowerState, {{PowerState::kClockGated, "clock_gated"},
                                          {PowerState::kActive, "active"}})

const char *ToString(SlotState s);
const char *ToString(DeviceMode m);
const char *ToString(PowerState p);

/// What a configured region (or a whole device) currently holds.
struct DesignRef {
  std::string bitfile;
  ResourceVector footprint;
  bool operator==(const DesignRef &) const = default;
};

struct VSlot {
  int index = 0;
  ResourceVector capacity;
  SlotState state = SlotState::kFree;
  std::optional<LeaseId> lease_id;
  std::optional<DesignRef> design;

  bool operator==(const VSlot &) const = default;
};

struct PhysicalFpga {
  FpgaId id = 0;
  NodeId node_id = 0;
  FpgaModel model;
  DeviceMode mode = DeviceMode::kUnassigned;
  PowerState power = PowerState::kClockGated;
  std::vector<VSlot> slots;
  std::optional<LeaseId> full_lease_id;
  /// Full-device design loaded under a full-access lease.
  std::optional<DesignRef> full_design;

  bool operator==(const PhysicalFpga &) const = default;

  bool HasAllocations() const;
  int FreeSlotCount() const;
  /// Slots that are not Free.
  int ActiveVfpgaCount() const;
  /// Lowest start index of `length` contiguous Free slots.
  std::optional<int> FindFreeSpan(int length) const;
  /// Re-derives power (and the idle mode) from the allocation state.
  void RefreshPower();
  /// Sum of the footprints of all designs loaded into slots.
  ResourceVector ConfiguredFootprint() const;
};

struct Node {
  NodeId id = 0;
  std::string hostname;
  std::vector<FpgaId> fpga_ids;
  std::string interconnect = "gigabit-ethernet";

  bool operator==(const Node &) const = default;
};

/// Device database: nodes, physical FPGAs and their virtual regions.
class Fleet {
 public:
  NodeId RegisterNode(const std::string &hostname);
  FpgaId RegisterFpga(NodeId node_id, const FpgaModel &model);

  void SaveDb(const std::filesystem::path &path) const;
  /// Parses and validates a database file. Any shape or version problem is
  /// reported as kSchemaVersionMismatch; nothing is returned in that case.
  static Fleet LoadDb(const std::filesystem::path &path);

  nlohmann::json ToJson() const;
  static Fleet FromJson(const nlohmann::json &doc);

  /// True iff `footprint` fits in what the slot offers.
  static bool CapacityCheck(const VSlot &slot, const ResourceVector &footprint);
  /// True iff `footprint` fits in the fabric not taken by framework or loaded designs.
  static bool CapacityCheck(const PhysicalFpga &fpga, const ResourceVector &footprint);

  const std::vector<Node> &nodes() const { return nodes_; }
  const std::vector<PhysicalFpga> &fpgas() const { return fpgas_; }
  std::vector<PhysicalFpga> &mutable_fpgas() { return fpgas_; }
  const PhysicalFpga &fpga(FpgaId id) const;
  PhysicalFpga &mutable_fpga(FpgaId id);

  /// Applies a link bandwidth override to every device.
  void SetLinkBandwidth(double mbps);

  /// Throws kInternal naming the first violated fleet invariant.
  void CheckInvariants() const;

  bool operator==(const Fleet &) const = default;

 private:
  std::vector<Node> nodes_;
  std::vector<PhysicalFpga> fpgas_;
};

/// The two-node, four-device testbed layout.
Fleet DefaultFleet();

void to_json(nlohmann::json &j, const FpgaModel &m);
void from_json(const nlohmann::json &j, FpgaModel &m);

}  // namespace rc3e
