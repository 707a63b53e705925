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

#include "rc3e/rc2f.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>

#include "rc3e/error.h"
#include "rc3e/hypervisor.h"

namespace rc3e::rc2f {

namespace {

int ParseIndex(std::string_view text, std::string_view prefix, std::string_view whole) {
  if (text.substr(0, prefix.size()) != prefix) {
    throw Error(ErrorCode::kInvalidArgument, "bad endpoint name: " + std::string(whole));
  }
  text.remove_prefix(prefix.size());
  int value = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw Error(ErrorCode::kInvalidArgument, "bad endpoint name: " + std::string(whole));
  }
  return value;
}

constexpr ResourceVector kPcieEndpoint{3268, 3592, 0, 8};
constexpr ResourceVector kControl{125, 255, 0, 1};

double Percent(int64_t used, int64_t capacity) {
  if (capacity <= 0) return 0.0;
  return std::round(1000.0 * static_cast<double>(used) / static_cast<double>(capacity)) / 10.0;
}

}  // namespace

ResourceVector VfpgaInterfaceFootprint(int vfpgas) {
  switch (vfpgas) {
    case 1: return {3689, 3127, 0, 4};
    case 2: return {4414, 3790, 0, 8};
    case 4: return {5139, 4471, 0, 16};
    default:
      throw Error(ErrorCode::kOutOfRange, "framework is built for 1, 2 or 4 vFPGAs");
  }
}

ResourceVector FrameworkFootprint(int vfpgas) {
  return kPcieEndpoint + kControl + VfpgaInterfaceFootprint(vfpgas);
}

Utilization ReportUtilization(const ResourceVector &used, const ResourceVector &capacity) {
  return {Percent(used.lut, capacity.lut), Percent(used.ff, capacity.ff),
          Percent(used.dsp, capacity.dsp), Percent(used.bram36, capacity.bram36)};
}

Endpoint Endpoint::Parse(std::string_view name) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t slash = name.find('/', start);
    parts.push_back(name.substr(start, slash == std::string_view::npos ? slash : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  Endpoint ep;
  if (parts.size() == 2 && parts[1] == "gcs") {
    ep.fpga = static_cast<FpgaId>(ParseIndex(parts[0], "fpga", name));
    ep.kind = EndpointKind::kGcs;
    return ep;
  }
  if (parts.size() != 3) throw Error(ErrorCode::kInvalidArgument, "bad endpoint name: " + std::string(name));
  ep.fpga = static_cast<FpgaId>(ParseIndex(parts[0], "fpga", name));
  ep.slot = ParseIndex(parts[1], "v", name);
  if (parts[2] == "ucs") ep.kind = EndpointKind::kUcs;
  else if (parts[2] == "in") ep.kind = EndpointKind::kIn;
  else if (parts[2] == "out") ep.kind = EndpointKind::kOut;
  else throw Error(ErrorCode::kInvalidArgument, "bad endpoint name: " + std::string(name));
  return ep;
}

std::string Endpoint::ToString() const {
  std::string s = "fpga" + std::to_string(fpga);
  switch (kind) {
    case EndpointKind::kGcs: return s + "/gcs";
    case EndpointKind::kUcs: return s + "/v" + std::to_string(slot) + "/ucs";
    case EndpointKind::kIn: return s + "/v" + std::to_string(slot) + "/in";
    case EndpointKind::kOut: return s + "/v" + std::to_string(slot) + "/out";
  }
  return s;
}

ControlSignal ParseControlSignal(std::string_view name) {
  if (name == "full_reset") return ControlSignal::kFullReset;
  if (name == "user_reset") return ControlSignal::kUserReset;
  if (name == "test_loopback") return ControlSignal::kTestLoopback;
  throw Error(ErrorCode::kInvalidArgument, "unknown control signal: " + std::string(name));
}

const char *ToString(KernelActivity a) {
  switch (a) {
    case KernelActivity::kIdle: return "idle";
    case KernelActivity::kRunning: return "running";
    case KernelActivity::kDone: return "done";
  }
  return "?";
}

std::vector<std::string> DeviceHandle::Endpoints() const {
  std::vector<std::string> out;
  if (system_scope) out.push_back(Endpoint{device, -1, EndpointKind::kGcs}.ToString());
  for (int s : slots) {
    for (EndpointKind k : {EndpointKind::kUcs, EndpointKind::kIn, EndpointKind::kOut}) {
      out.push_back(Endpoint{device, s, k}.ToString());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Access checks and bookkeeping

DeviceHandle Runtime::OpenDevice(const std::string &user, LeaseId lease_id) {
  const Lease &lease = hv_.UserLease(user, lease_id);
  DeviceHandle h;
  h.user = user;
  h.lease_id = lease_id;
  h.device = lease.target.device_id;
  h.system_scope = lease.target.whole_device();
  if (h.system_scope) {
    for (const auto &s : hv_.fleet().fpga(h.device).slots) h.slots.push_back(s.index);
  } else {
    h.slots = lease.target.slot_indices;
  }
  return h;
}

void Runtime::CheckHandle(const DeviceHandle &h) const {
  const Lease *lease = hv_.FindLease(h.lease_id);
  if (lease == nullptr) {
    throw Error(ErrorCode::kUnknownLease, "lease " + std::to_string(h.lease_id) + " is gone");
  }
  if (lease->user != h.user || lease->managed || lease->target.device_id != h.device) {
    throw Error(ErrorCode::kPermissionDenied, "handle does not match its lease");
  }
}

void Runtime::CheckSlot(const DeviceHandle &h, int slot) const {
  if (std::find(h.slots.begin(), h.slots.end(), slot) == h.slots.end()) {
    throw Error(ErrorCode::kPermissionDenied,
                "vFPGA " + std::to_string(slot) + " is not part of lease " +
                    std::to_string(h.lease_id));
  }
}

void Runtime::CheckAddr(int addr) const {
  if (addr < 0 || addr >= kConfigWords) {
    throw Error(ErrorCode::kOutOfRange, "config word " + std::to_string(addr) + " out of range");
  }
}

Runtime::SlotRuntime &Runtime::Slot(FpgaId device, int slot) {
  return devices_[device].slots[slot];
}

const Runtime::SlotRuntime *Runtime::FindSlot(FpgaId device, int slot) const {
  auto d = devices_.find(device);
  if (d == devices_.end()) return nullptr;
  auto s = d->second.slots.find(slot);
  return s == d->second.slots.end() ? nullptr : &s->second;
}

int Runtime::HeadIndex(FpgaId device, int slot) const {
  const SlotRuntime *s = FindSlot(device, slot);
  return (s != nullptr && s->head >= 0) ? s->head : slot;
}

Runtime::SlotRuntime &Runtime::Head(FpgaId device, int slot) {
  return Slot(device, HeadIndex(device, slot));
}

bool Runtime::HasDesign(FpgaId device, int head) const {
  const SlotRuntime *s = FindSlot(device, head);
  if (s == nullptr || !s->kernel) return false;
  const PhysicalFpga &f = hv_.fleet().fpga(device);
  if (f.mode == DeviceMode::kFullAccess) return f.full_design.has_value() && head == 0;
  const SlotState st = f.slots.at(head).state;
  return st == SlotState::kConfigured || st == SlotState::kRunning;
}

void Runtime::ChargeGcs() { hv_.Charge(hv_.latency().gcs_access); }

void Runtime::ChargeUcs(FpgaId device) {
  const int active = hv_.fleet().fpga(device).ActiveVfpgaCount();
  hv_.Charge(hv_.latency().Charge(LatencyKind::kUcsAccess, Locality::kRemote, active));
}

void Runtime::SetFleetSlotState(FpgaId device, int head, SlotState state) {
  PhysicalFpga &f = hv_.mutable_fleet().mutable_fpga(device);
  if (f.mode == DeviceMode::kFullAccess) return;
  const SlotRuntime &s = Slot(device, head);
  for (int i = head; i < head + s.span && i < static_cast<int>(f.slots.size()); ++i) {
    if (f.slots[i].state == SlotState::kConfigured || f.slots[i].state == SlotState::kRunning) {
      f.slots[i].state = state;
    }
  }
}

// ---------------------------------------------------------------------------
// Configuration spaces and control

uint32_t Runtime::GcsRead(const DeviceHandle &h, int addr) {
  CheckHandle(h);
  if (!h.system_scope) throw Error(ErrorCode::kPermissionDenied, "gcs is system space");
  CheckAddr(addr);
  ChargeGcs();
  const PhysicalFpga &f = hv_.fleet().fpga(h.device);
  if (addr == 0) {
    return (f.power == PowerState::kActive ? 1u : 0u) | (static_cast<uint32_t>(f.mode) << 4);
  }
  if (addr >= 1 && addr <= kMaxSlotsPerFpga) {
    const int slot = addr - 1;
    return slot < static_cast<int>(f.slots.size()) ? static_cast<uint32_t>(f.slots[slot].state)
                                                   : 0u;
  }
  if (addr == kGcsControlWord) {
    uint32_t bits = 0;
    for (const auto &[index, s] : devices_[h.device].slots) {
      if (s.loopback) bits |= 1u << (8 + index);
    }
    return bits;
  }
  return devices_[h.device].gcs[addr];
}

void Runtime::GcsWrite(const DeviceHandle &h, int addr, uint32_t value) {
  CheckHandle(h);
  if (!h.system_scope) throw Error(ErrorCode::kPermissionDenied, "gcs is system space");
  CheckAddr(addr);
  if (addr < kGcsFirstScratchWord) {
    throw Error(ErrorCode::kPermissionDenied, "gcs word " + std::to_string(addr) + " is read-only");
  }
  ChargeGcs();
  devices_[h.device].gcs[addr] = value;
}

uint32_t Runtime::UcsRead(const DeviceHandle &h, int slot, int addr) {
  CheckHandle(h);
  CheckSlot(h, slot);
  CheckAddr(addr);
  ChargeUcs(h.device);
  return Slot(h.device, slot).ucs[addr];
}

void Runtime::UcsWrite(const DeviceHandle &h, int slot, int addr, uint32_t value) {
  CheckHandle(h);
  CheckSlot(h, slot);
  CheckAddr(addr);
  ChargeUcs(h.device);
  Slot(h.device, slot).ucs[addr] = value;
}

uint32_t Runtime::KernelUcsRead(FpgaId device, int slot, int addr) const {
  CheckAddr(addr);
  const SlotRuntime *s = FindSlot(device, slot);
  return s == nullptr ? 0u : s->ucs[addr];
}

void Runtime::KernelUcsWrite(FpgaId device, int slot, int addr, uint32_t value) {
  CheckAddr(addr);
  Slot(device, slot).ucs[addr] = value;
}

void Runtime::ClearStreams(SlotRuntime &s) {
  if (s.session) hv_.engine().Close(*s.session);
  s.session.reset();
  s.staged.clear();
  s.out.clear();
  s.segments.clear();
  s.in_total = s.in_base = s.out_produced = s.out_read = 0;
  if (s.kernel) s.kernel->Reset();
}

void Runtime::Control(const DeviceHandle &h, ControlSignal signal, std::optional<int> slot) {
  CheckHandle(h);
  if (signal == ControlSignal::kFullReset) {
    if (!h.system_scope) throw Error(ErrorCode::kPermissionDenied, "full_reset is system scope");
    ChargeGcs();
    for (auto &[index, s] : devices_[h.device].slots) {
      s.ucs.fill(0);
      s.loopback = false;
      ClearStreams(s);
    }
    return;
  }
  if (!slot) throw Error(ErrorCode::kInvalidArgument, "signal needs a vFPGA slot");
  CheckSlot(h, *slot);
  ChargeGcs();
  const int head = HeadIndex(h.device, *slot);
  SlotRuntime &s = Slot(h.device, head);
  if (signal == ControlSignal::kUserReset) {
    s.loopback = false;
    ClearStreams(s);
    return;
  }
  s.loopback = true;
  FlushStaged(h.device, head);
}

// ---------------------------------------------------------------------------
// Streams

uint64_t Runtime::Delivered(const SlotRuntime &s) const {
  if (s.session && hv_.engine().IsActive(*s.session)) {
    return s.in_base + static_cast<uint64_t>(std::floor(hv_.engine().BytesDone(*s.session) + 1e-6));
  }
  return s.in_total;
}

uint64_t Runtime::InputNeededFor(const SlotRuntime &s, uint64_t out_cumulative) const {
  if (out_cumulative == 0) return 0;
  for (const Segment &seg : s.segments) {
    if (seg.out_end < out_cumulative || seg.out_start >= out_cumulative) continue;
    const uint64_t into = out_cumulative - seg.out_start;
    if (seg.identity) return seg.in_start + into;
    const KernelBinding &b = *s.binding;
    const uint64_t frames = (into + b.OutputFrameBytes() - 1) / b.OutputFrameBytes();
    return seg.in_start + frames * b.InputFrameBytes() - seg.carry;
  }
  return s.in_total;
}

uint64_t Runtime::OutputReadyFor(const SlotRuntime &s, uint64_t delivered) const {
  uint64_t ready = 0;
  for (const Segment &seg : s.segments) {
    if (seg.in_end <= delivered) {
      ready = seg.out_end;
      continue;
    }
    if (seg.in_start >= delivered) return seg.out_start;
    const uint64_t into = delivered - seg.in_start;
    if (seg.identity) return seg.out_start + into;
    const KernelBinding &b = *s.binding;
    const uint64_t frames = (into + seg.carry) / b.InputFrameBytes();
    return std::min(seg.out_end, seg.out_start + frames * b.OutputFrameBytes());
  }
  return s.segments.empty() ? s.out_produced : ready;
}

void Runtime::Feed(FpgaId device, int head, std::span<const uint8_t> bytes) {
  if (bytes.empty()) return;
  SlotRuntime &s = Slot(device, head);
  Segment seg;
  seg.in_start = s.in_total;
  seg.in_end = s.in_total + bytes.size();
  seg.out_start = s.out_produced;
  seg.identity = s.loopback || s.binding->type == KernelType::kLoopback;
  std::vector<uint8_t> produced;
  if (s.loopback) {
    produced.assign(bytes.begin(), bytes.end());
  } else {
    seg.carry = s.kernel->buffered();
    produced = s.kernel->Step(bytes);
  }
  seg.out_end = seg.out_start + produced.size();
  s.segments.push_back(seg);
  s.out.insert(s.out.end(), produced.begin(), produced.end());
  s.out_produced += produced.size();
  s.in_total += bytes.size();

  ContentionEngine &engine = hv_.engine();
  if (s.session && engine.IsActive(*s.session) && engine.Extend(*s.session, bytes.size())) return;
  const double cap = s.loopback ? kUncapped : s.binding->compute_rate;
  s.in_base = s.in_total - bytes.size();
  s.session = engine.Open(device, bytes.size(), cap, {}, s.span);
}

void Runtime::FlushStaged(FpgaId device, int head) {
  SlotRuntime &s = Slot(device, head);
  if (s.staged.empty() || !Consuming(s)) return;
  std::vector<uint8_t> staged = std::move(s.staged);
  s.staged.clear();
  Feed(device, head, staged);
}

void Runtime::FifoWrite(const DeviceHandle &h, const Endpoint &ep, std::span<const uint8_t> bytes) {
  CheckHandle(h);
  if (ep.fpga != h.device) throw Error(ErrorCode::kPermissionDenied, "endpoint on another device");
  CheckSlot(h, ep.slot);
  if (ep.kind == EndpointKind::kOut) {
    throw Error(ErrorCode::kWrongDirection, ep.ToString() + " is device-to-host");
  }
  if (ep.kind != EndpointKind::kIn) {
    throw Error(ErrorCode::kInvalidArgument, ep.ToString() + " is not a FIFO");
  }
  const int head = HeadIndex(h.device, ep.slot);
  SlotRuntime &s = Slot(h.device, head);
  if (Consuming(s)) {
    Feed(h.device, head, bytes);
    return;
  }
  if (s.staged.size() + bytes.size() > s.depth) {
    throw Error(ErrorCode::kFifoFull, ep.ToString() + " is full and nothing consumes it");
  }
  s.staged.insert(s.staged.end(), bytes.begin(), bytes.end());
}

std::vector<uint8_t> Runtime::FifoRead(const DeviceHandle &h, const Endpoint &ep,
                                       std::optional<uint64_t> n) {
  CheckHandle(h);
  if (ep.fpga != h.device) throw Error(ErrorCode::kPermissionDenied, "endpoint on another device");
  CheckSlot(h, ep.slot);
  if (ep.kind == EndpointKind::kIn) {
    throw Error(ErrorCode::kWrongDirection, ep.ToString() + " is host-to-device");
  }
  if (ep.kind != EndpointKind::kOut) {
    throw Error(ErrorCode::kInvalidArgument, ep.ToString() + " is not a FIFO");
  }
  const FpgaId device = h.device;
  const int head = HeadIndex(device, ep.slot);
  const uint64_t available = Slot(device, head).out.size();
  const uint64_t want = n.value_or(available);
  if (want > available) {
    throw Error(ErrorCode::kFifoUnderrun,
                "requested " + std::to_string(want) + " bytes, the written data yields " +
                    std::to_string(available));
  }

  SlotRuntime &s = Slot(device, head);
  const uint64_t need_in = InputNeededFor(s, s.out_read + want);
  if (Delivered(s) < need_in) {
    auto reached = std::make_shared<bool>(false);
    hv_.engine().Watch(*s.session, need_in - s.in_base, [reached] { *reached = true; });
    hv_.loop().AdvanceUntil([&] { return *reached; });
  }

  SlotRuntime &t = Slot(device, head);
  std::vector<uint8_t> out(t.out.begin(), t.out.begin() + static_cast<std::ptrdiff_t>(want));
  t.out.erase(t.out.begin(), t.out.begin() + static_cast<std::ptrdiff_t>(want));
  t.out_read += want;
  const uint64_t delivered = Delivered(t);
  std::erase_if(t.segments, [&](const Segment &seg) {
    return seg.out_end <= t.out_read && seg.in_end <= delivered;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Kernel lifecycle

void Runtime::StartInternal(FpgaId device, int slot) {
  const int head = HeadIndex(device, slot);
  SlotRuntime &s = Slot(device, head);
  s.started = true;
  SetFleetSlotState(device, head, SlotState::kRunning);
  FlushStaged(device, head);
}

void Runtime::KernelStart(const DeviceHandle &h, int slot) {
  CheckHandle(h);
  CheckSlot(h, slot);
  const int head = HeadIndex(h.device, slot);
  if (!HasDesign(h.device, head)) {
    throw Error(ErrorCode::kNotConfigured, "vFPGA " + std::to_string(slot) + " holds no design");
  }
  ChargeGcs();
  StartInternal(h.device, head);
}

KernelReport Runtime::KernelStatus(const DeviceHandle &h, int slot) {
  CheckHandle(h);
  CheckSlot(h, slot);
  ChargeGcs();
  const int head = HeadIndex(h.device, slot);
  const SlotRuntime &s = Slot(h.device, head);
  KernelReport r;
  const PhysicalFpga &f = hv_.fleet().fpga(h.device);
  if (f.mode == DeviceMode::kFullAccess) {
    r.slot_state = !HasDesign(h.device, head) ? SlotState::kAllocated
                   : s.started                ? SlotState::kRunning
                                              : SlotState::kConfigured;
  } else {
    r.slot_state = f.slots.at(head).state;
  }
  const bool streaming = s.session && hv_.engine().IsActive(*s.session);
  r.activity = streaming ? KernelActivity::kRunning
               : s.in_total > 0 ? KernelActivity::kDone
                                : KernelActivity::kIdle;
  r.bytes_in = Delivered(s);
  r.bytes_out = OutputReadyFor(s, r.bytes_in);
  return r;
}

void Runtime::KernelStop(const DeviceHandle &h, int slot) {
  CheckHandle(h);
  CheckSlot(h, slot);
  const int head = HeadIndex(h.device, slot);
  if (!HasDesign(h.device, head)) {
    throw Error(ErrorCode::kNotConfigured, "vFPGA " + std::to_string(slot) + " holds no design");
  }
  ChargeGcs();
  SlotRuntime &s = Slot(h.device, head);
  if (s.session && hv_.engine().IsActive(*s.session)) {
    // Input the core has not consumed yet, and its output, are dropped.
    const uint64_t delivered = Delivered(s);
    const uint64_t ready = OutputReadyFor(s, delivered);
    hv_.engine().Close(*s.session);
    const uint64_t keep = ready - s.out_read;
    s.out.resize(keep);
    s.out_produced = ready;
    s.in_total = delivered;
  }
  s.session.reset();
  s.segments.clear();
  if (s.kernel) s.kernel->Reset();
  s.started = false;
  SetFleetSlotState(h.device, head, SlotState::kConfigured);
}

// ---------------------------------------------------------------------------
// Hypervisor hooks

void Runtime::OnConfigured(FpgaId device, int first_slot, int span, const KernelBinding &binding) {
  for (int i = first_slot; i < first_slot + span; ++i) {
    SlotRuntime &s = Slot(device, i);
    ClearStreams(s);
    s.ucs.fill(0);
    s.head = first_slot;
    s.span = span;
    s.started = false;
    s.loopback = false;
    s.binding.reset();
    s.kernel.reset();
  }
  SlotRuntime &head = Slot(device, first_slot);
  head.binding = binding;
  head.kernel.emplace(binding);
}

void Runtime::OnReleased(FpgaId device, std::span<const int> slots) {
  auto d = devices_.find(device);
  if (d == devices_.end()) return;
  for (int i : slots) {
    auto it = d->second.slots.find(i);
    if (it == d->second.slots.end()) continue;
    if (it->second.session) hv_.engine().Close(*it->second.session);
    d->second.slots.erase(it);
  }
  if (d->second.slots.empty()) devices_.erase(d);
}

std::optional<SessionId> Runtime::FeedInternal(FpgaId device, int slot,
                                               std::span<const uint8_t> bytes) {
  const int head = HeadIndex(device, slot);
  Feed(device, head, bytes);
  const SlotRuntime &s = Slot(device, head);
  if (bytes.empty() || !s.session) return std::nullopt;
  return s.session;
}

std::vector<uint8_t> Runtime::DrainInternal(FpgaId device, int slot) {
  SlotRuntime &s = Head(device, slot);
  std::vector<uint8_t> out(s.out.begin(), s.out.end());
  s.out_read += s.out.size();
  s.out.clear();
  return out;
}

void Runtime::FinishInternal(FpgaId device, int slot) const {
  const SlotRuntime *s = FindSlot(device, HeadIndex(device, slot));
  if (s != nullptr && s->kernel) s->kernel->Finish();
}

}  // namespace rc3e::rc2f
