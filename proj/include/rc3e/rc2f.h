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

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rc3e/contention.h"
#include "rc3e/fleet.h"
#include "rc3e/kernels.h"

namespace rc3e {
class Hypervisor;
}

namespace rc3e::rc2f {

inline constexpr int kConfigWords = 64;
/// gcs words below this address are status/control registers, read-only
/// from the host.
inline constexpr int kGcsFirstScratchWord = 16;
inline constexpr int kGcsControlWord = 8;
inline constexpr uint64_t kDefaultFifoDepth = 64ULL << 20;

/// Fabric taken by the framework around `vfpgas` regions (1, 2 or 4): the
/// PCIe endpoint, the controller with its gcs, and the per-region FIFO and
/// ucs interfaces. Throws kOutOfRange for other counts.
ResourceVector FrameworkFootprint(int vfpgas);
/// Interface logic for `vfpgas` regions alone.
ResourceVector VfpgaInterfaceFootprint(int vfpgas);

/// Share of the device in percent, per resource, as reported (one decimal).
struct Utilization {
  double lut = 0;
  double ff = 0;
  double dsp = 0;
  double bram36 = 0;
};
Utilization ReportUtilization(const ResourceVector &used, const ResourceVector &capacity);

enum class EndpointKind { kGcs, kUcs, kIn, kOut };

/// Stable endpoint names: "fpga<id>/gcs" and "fpga<id>/v<slot>/{ucs,in,out}".
struct Endpoint {
  FpgaId fpga = 0;
  int slot = -1;
  EndpointKind kind = EndpointKind::kUcs;

  static Endpoint Parse(std::string_view name);
  std::string ToString() const;
  bool operator==(const Endpoint &) const = default;
};

enum class ControlSignal { kFullReset, kUserReset, kTestLoopback };
ControlSignal ParseControlSignal(std::string_view name);

enum class KernelActivity { kIdle, kRunning, kDone };
const char *ToString(KernelActivity a);

struct KernelReport {
  KernelActivity activity = KernelActivity::kIdle;
  SlotState slot_state = SlotState::kFree;
  uint64_t bytes_in = 0;
  uint64_t bytes_out = 0;
};

/// A user's view onto one lease. System scope (the gcs and device-wide
/// reset) is only granted for full-device leases.
struct DeviceHandle {
  std::string user;
  LeaseId lease_id = 0;
  FpgaId device = 0;
  std::vector<int> slots;
  bool system_scope = false;

  std::vector<std::string> Endpoints() const;
};

/// On-device framework emulation: config spaces, control signals, FIFO
/// endpoints and kernel lifecycle. Data moves through the kernels at once;
/// when it becomes readable is decided by the contention engine, so a
/// blocking read advances virtual time.
class Runtime {
 public:
  explicit Runtime(Hypervisor &hv) : hv_(hv) {}

  DeviceHandle OpenDevice(const std::string &user, LeaseId lease_id);

  uint32_t GcsRead(const DeviceHandle &h, int addr);
  void GcsWrite(const DeviceHandle &h, int addr, uint32_t value);
  uint32_t UcsRead(const DeviceHandle &h, int slot, int addr);
  void UcsWrite(const DeviceHandle &h, int slot, int addr, uint32_t value);
  void Control(const DeviceHandle &h, ControlSignal signal, std::optional<int> slot = {});

  void FifoWrite(const DeviceHandle &h, const Endpoint &ep, std::span<const uint8_t> bytes);
  /// Blocks in virtual time until `n` bytes are deliverable. Without `n`
  /// returns everything the data written so far will produce. Asking for
  /// more than that fails with kFifoUnderrun and consumes nothing.
  std::vector<uint8_t> FifoRead(const DeviceHandle &h, const Endpoint &ep,
                                std::optional<uint64_t> n = {});

  void KernelStart(const DeviceHandle &h, int slot);
  KernelReport KernelStatus(const DeviceHandle &h, int slot);
  void KernelStop(const DeviceHandle &h, int slot);

  /// Kernel-side port of the dual-ported ucs.
  uint32_t KernelUcsRead(FpgaId device, int slot, int addr) const;
  void KernelUcsWrite(FpgaId device, int slot, int addr, uint32_t value);

  // Hooks for the hypervisor.
  void OnConfigured(FpgaId device, int first_slot, int span, const KernelBinding &binding);
  void OnReleased(FpgaId device, std::span<const int> slots);
  void StartInternal(FpgaId device, int slot);
  /// Feeds input as if written to the slot's in-FIFO; returns the stream
  /// session carrying it, if any bytes were sent.
  std::optional<SessionId> FeedInternal(FpgaId device, int slot, std::span<const uint8_t> bytes);
  /// Everything produced so far, without waiting.
  std::vector<uint8_t> DrainInternal(FpgaId device, int slot);
  /// Throws kMalformedFrame if the core holds a partial frame.
  void FinishInternal(FpgaId device, int slot) const;

 private:
  // Output bytes [out_start, out_end) were produced from input fed in
  // [in_start, in_end); `carry` partial-frame bytes preceded the segment.
  struct Segment {
    uint64_t in_start = 0;
    uint64_t in_end = 0;
    uint64_t out_start = 0;
    uint64_t out_end = 0;
    uint64_t carry = 0;
    bool identity = true;
  };

  struct SlotRuntime {
    std::array<uint32_t, kConfigWords> ucs{};
    int head = -1;  // first slot of the design span, -1 when unconfigured
    int span = 1;
    std::optional<KernelBinding> binding;
    std::optional<StreamKernel> kernel;
    bool started = false;
    bool loopback = false;
    std::vector<uint8_t> staged;
    std::deque<uint8_t> out;
    std::vector<Segment> segments;
    uint64_t in_total = 0;
    uint64_t in_base = 0;
    uint64_t out_produced = 0;
    uint64_t out_read = 0;
    std::optional<SessionId> session;
    uint64_t depth = kDefaultFifoDepth;
  };

  struct DeviceRuntime {
    std::array<uint32_t, kConfigWords> gcs{};
    std::map<int, SlotRuntime> slots;
  };

  void CheckHandle(const DeviceHandle &h) const;
  void CheckSlot(const DeviceHandle &h, int slot) const;
  void CheckAddr(int addr) const;
  SlotRuntime &Slot(FpgaId device, int slot);
  const SlotRuntime *FindSlot(FpgaId device, int slot) const;
  SlotRuntime &Head(FpgaId device, int slot);
  int HeadIndex(FpgaId device, int slot) const;
  bool HasDesign(FpgaId device, int head) const;
  void ChargeGcs();
  void ChargeUcs(FpgaId device);

  bool Consuming(const SlotRuntime &s) const { return s.loopback || (s.started && s.kernel); }
  void Feed(FpgaId device, int head, std::span<const uint8_t> bytes);
  void FlushStaged(FpgaId device, int head);
  uint64_t Delivered(const SlotRuntime &s) const;
  uint64_t InputNeededFor(const SlotRuntime &s, uint64_t out_cumulative) const;
  uint64_t OutputReadyFor(const SlotRuntime &s, uint64_t delivered) const;
  void ClearStreams(SlotRuntime &s);
  void SetFleetSlotState(FpgaId device, int head, SlotState state);

  Hypervisor &hv_;
  std::map<FpgaId, DeviceRuntime> devices_;
};

}  // namespace rc3e::rc2f
