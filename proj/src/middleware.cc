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

#include "rc3e/middleware.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "rc3e/error.h"
#include "rc3e/kernels.h"

namespace rc3e {

using nlohmann::json;

namespace {

const std::set<std::string> kReadOnlyCommands = {"STATUS", "LIST", "OPEN", "UCS_RD"};

json TimeOrNull(const std::optional<SimTime> &t) {
  return t ? json(ToMicros(*t)) : json(nullptr);
}

std::vector<uint8_t> ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::string &path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
}

// Payload from exactly one of data_b64, batch {n, count, seed} or path.
std::vector<uint8_t> ReadPayload(const json &args) {
  const int given = static_cast<int>(args.contains("data_b64")) +
                    static_cast<int>(args.contains("batch")) +
                    static_cast<int>(args.contains("path"));
  if (given != 1) {
    throw Error(ErrorCode::kBadRequest, "give exactly one of data_b64, batch or path");
  }
  if (args.contains("data_b64")) return Base64Decode(args.at("data_b64").get<std::string>());
  if (args.contains("path")) return ReadFile(args.at("path").get<std::string>());
  const json &b = args.at("batch");
  return GenerateMatrixBatch(b.at("n").get<uint32_t>(), b.at("count").get<uint64_t>(),
                             b.value("seed", uint64_t{1}));
}

json PayloadResult(std::span<const uint8_t> bytes, const json &args) {
  json r{{"bytes", bytes.size()}};
  if (args.contains("path")) {
    WriteFile(args.at("path").get<std::string>(), bytes);
  } else {
    r["data_b64"] = Base64Encode(bytes);
  }
  return r;
}

LeaseSize SizeFromArgs(ServiceModel model, const json &args) {
  if (model == ServiceModel::kRSaaS || args.value("whole", false)) return LeaseSize::WholeDevice();
  return LeaseSize::Slots(args.value("slots", 1));
}

json SizeToJson(const LeaseSize &size) {
  return size.whole_device ? json("whole") : json(size.slots);
}

json ReportToJson(const rc2f::KernelReport &r) {
  return {{"activity", rc2f::ToString(r.activity)},
          {"state", r.slot_state},
          {"bytes_in", r.bytes_in},
          {"bytes_out", r.bytes_out}};
}

rc2f::Endpoint EndpointArg(const json &args) {
  return rc2f::Endpoint::Parse(args.at("endpoint").get<std::string>());
}

}  // namespace

Dispatcher::Dispatcher(Hypervisor &hv, std::filesystem::path db_path)
    : hv_(hv), db_path_(std::move(db_path)) {}

std::string Dispatcher::HandleLine(SessionContext &session, std::string_view line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception &e) {
    return json{{"id", nullptr},
                {"ok", false},
                {"error", {{"code", "bad_request"}, {"message", e.what()}}},
                {"sim_time", ToMicros(hv_.loop().Now())}}
        .dump();
  }
  return Handle(session, request).dump();
}

json Dispatcher::Handle(SessionContext &session, const json &request) {
  json response{{"id", nullptr}};
  ErrorCode code = ErrorCode::kInternal;
  std::string message;
  bool ok = false;
  try {
    if (!request.is_object()) throw Error(ErrorCode::kBadRequest, "request must be an object");
    if (request.contains("id")) response["id"] = request["id"];
    if (!request.contains("cmd") || !request["cmd"].is_string()) {
      throw Error(ErrorCode::kBadRequest, "cmd must be a string");
    }
    if (!request.contains("user") || !request["user"].is_string() ||
        request["user"].get<std::string>().empty()) {
      throw Error(ErrorCode::kBadRequest, "user must be a nonempty string");
    }
    const json args = request.value("args", json::object());
    if (!args.is_object()) throw Error(ErrorCode::kBadRequest, "args must be an object");
    std::string cmd = request["cmd"].get<std::string>();
    std::transform(cmd.begin(), cmd.end(), cmd.begin(), ::toupper);
    response["result"] = Dispatch(session, cmd, request["user"].get<std::string>(), args);
    ok = true;
    if (!kReadOnlyCommands.count(cmd) && !(cmd == "JOBS" && !args.value("wait", false))) {
      Persist();
    }
  } catch (const Error &e) {
    code = e.code();
    message = e.what();
  } catch (const json::exception &e) {
    code = ErrorCode::kBadRequest;
    message = e.what();
  } catch (const std::exception &e) {
    code = ErrorCode::kInternal;
    message = e.what();
  }
  response["ok"] = ok;
  if (!ok) {
    response.erase("result");
    response["error"] = {{"code", ErrorCodeName(code)}, {"message", message}};
  }
  response["sim_time"] = ToMicros(hv_.loop().Now());
  return response;
}

json Dispatcher::Dispatch(SessionContext &session, const std::string &cmd,
                          const std::string &user, const Args &args) {
  if (cmd == "ALLOC") return Alloc(user, args);
  if (cmd == "RELEASE") return Release(session, user, args);
  if (cmd == "CONFIGURE") return Configure(session, user, args);
  if (cmd == "STATUS") return Status(session, user, args);
  if (cmd == "EXEC") return Exec(session, user, args);
  if (cmd == "SUBMIT") return Submit(user, args);
  if (cmd == "JOBS") return Jobs(user, args);
  if (cmd == "LIST") return List(user);
  if (cmd == "OPEN") return Open(session, user, args);
  if (cmd == "UCS_RD") return UcsRead(session, user, args);
  if (cmd == "UCS_WR") return UcsWrite(session, user, args);
  if (cmd == "CTRL") return Ctrl(session, user, args);
  if (cmd == "PUT") return Put(session, user, args);
  if (cmd == "GET") return Get(session, user, args);
  throw Error(ErrorCode::kUnknownCmd, "unknown command " + cmd);
}

void Dispatcher::Persist() {
  if (!db_path_.empty()) hv_.fleet().SaveDb(db_path_);
}

Locality Dispatcher::LocalityOf(const SessionContext &session, const Args &args) const {
  if (!args.contains("locality")) return session.locality;
  return ParseLocality(args.at("locality").get<std::string>());
}

Bitfile Dispatcher::ResolveBitfile(const Args &ref) const {
  if (ref.is_object()) return BitfileFromJson(ref);
  const std::string name = ref.get<std::string>();
  if (const Bitfile *b = hv_.FindService(name)) return *b;
  std::ifstream in(name);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read bitfile " + name);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidBitfile, name + ": " + e.what());
  }
  return BitfileFromJson(doc);
}

const rc2f::DeviceHandle &Dispatcher::HandleFor(SessionContext &session, const std::string &user,
                                                LeaseId lease_id) {
  auto it = session.handles.find(lease_id);
  if (it != session.handles.end() && it->second.user == user) return it->second;
  rc2f::DeviceHandle h = hv_.runtime().OpenDevice(user, lease_id);
  return session.handles.insert_or_assign(lease_id, std::move(h)).first->second;
}

// ---------------------------------------------------------------------------
// Lease commands

json Dispatcher::Alloc(const std::string &user, const Args &args) {
  const ServiceModel model = ParseServiceModel(args.value("model", std::string("raaas")));
  const Lease lease = hv_.Allocate(user, model, SizeFromArgs(model, args));
  const PhysicalFpga &f = hv_.fleet().fpga(lease.target.device_id);
  std::vector<int> slots = lease.target.slot_indices;
  if (lease.target.whole_device()) {
    for (const auto &s : f.slots) slots.push_back(s.index);
  }
  return {{"lease_id", lease.id},
          {"model", ToString(lease.model)},
          {"device_id", f.id},
          {"node_id", f.node_id},
          {"whole_device", lease.target.whole_device()},
          {"slots", slots}};
}

json Dispatcher::Release(SessionContext &session, const std::string &user, const Args &args) {
  const LeaseId id = args.at("lease_id").get<LeaseId>();
  hv_.Release(user, id);
  session.handles.erase(id);
  return {{"lease_id", id}, {"released", true}};
}

json Dispatcher::Configure(SessionContext &session, const std::string &user, const Args &args) {
  const LeaseId id = args.at("lease_id").get<LeaseId>();
  const Bitfile bitfile = ResolveBitfile(args.at("bitfile"));
  const ConfigureReceipt r = hv_.Configure(user, id, bitfile, LocalityOf(session, args));
  return {{"lease_id", r.lease_id},
          {"bitfile", bitfile.name},
          {"kind", r.kind},
          {"path", ToString(r.path)},
          {"duration_us", ToMicros(r.duration)},
          {"effective_at", ToMicros(r.effective_at)},
          {"pcie_link_restored", r.pcie_link_restored}};
}

json Dispatcher::Status(SessionContext &session, const std::string &user, const Args &args) {
  const StatusReport r =
      hv_.DeviceStatus(user, args.at("lease_id").get<LeaseId>(), LocalityOf(session, args));
  json slots = json::array();
  for (const auto &s : r.slots) {
    slots.push_back({{"index", s.index},
                     {"state", s.state},
                     {"design", s.design ? json(*s.design) : json(nullptr)}});
  }
  return {{"lease_id", r.lease_id},
          {"device_id", r.device_id},
          {"power", r.power},
          {"mode", r.mode},
          {"slots", slots},
          {"full_design", r.full_design ? json(*r.full_design) : json(nullptr)},
          {"latency_us", ToMicros(r.latency)},
          {"at", ToMicros(r.at)}};
}

json Dispatcher::List(const std::string &user) const {
  const Fleet &fleet = hv_.fleet();
  json nodes = json::array();
  for (const auto &n : fleet.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"hostname", n.hostname},
                     {"interconnect", n.interconnect},
                     {"fpgas", n.fpga_ids}});
  }
  auto mine = [&](const std::optional<LeaseId> &id) {
    if (!id) return false;
    const Lease *l = hv_.FindLease(*id);
    return l != nullptr && l->user == user && !l->managed;
  };
  json devices = json::array();
  for (const auto &f : fleet.fpgas()) {
    json slots = json::array();
    for (const auto &s : f.slots) {
      json slot{{"index", s.index}, {"state", s.state}};
      if (mine(s.lease_id)) {
        slot["lease_id"] = *s.lease_id;
        slot["design"] = s.design ? json(s.design->bitfile) : json(nullptr);
      }
      slots.push_back(slot);
    }
    json d{{"id", f.id},
           {"node_id", f.node_id},
           {"model", f.model.name},
           {"power", f.power},
           {"mode", f.mode},
           {"slots", slots}};
    if (mine(f.full_lease_id)) {
      d["lease_id"] = *f.full_lease_id;
      d["full_design"] = f.full_design ? json(f.full_design->bitfile) : json(nullptr);
    }
    devices.push_back(d);
  }
  json leases = json::array();
  for (const auto &l : hv_.Leases(user)) {
    if (l.managed) continue;
    leases.push_back({{"lease_id", l.id},
                      {"model", ToString(l.model)},
                      {"device_id", l.target.device_id},
                      {"slots", l.target.slot_indices},
                      {"created_at", ToMicros(l.created_at)}});
  }
  return {{"nodes", nodes}, {"devices", devices}, {"leases", leases}, {"services", hv_.Services()}};
}

// ---------------------------------------------------------------------------
// Batch jobs

json Dispatcher::Submit(const std::string &user, const Args &args) {
  const ServiceModel model = ParseServiceModel(args.value("model", std::string("raaas")));
  const LeaseRequest request{model, SizeFromArgs(model, args)};
  const Bitfile bitfile = ResolveBitfile(args.at("bitfile"));
  std::vector<uint8_t> input = ReadPayload(args.value("input", json::object()));
  const std::string input_ref = args.value("input_ref", std::string());
  const std::string output_ref = args.value("output_path", std::string());
  const JobId id =
      hv_.SubmitJob(user, request, bitfile, std::move(input), input_ref, output_ref);
  const BatchJob &job = hv_.Job(id);
  return {{"job_id", id}, {"state", job.state}};
}

json Dispatcher::Jobs(const std::string &user, const Args &args) {
  if (args.value("wait", false)) hv_.WaitForJobs();
  const bool with_output = args.value("include_output", false);
  std::vector<const BatchJob *> jobs;
  if (args.contains("job_id")) {
    const BatchJob &job = hv_.Job(args.at("job_id").get<JobId>());
    if (job.user != user) {
      throw Error(ErrorCode::kPermissionDenied, "job " + std::to_string(job.id) + " is not yours");
    }
    jobs.push_back(&job);
  } else {
    jobs = hv_.Jobs(user);
  }
  json out = json::array();
  for (const BatchJob *j : jobs) {
    json row{{"job_id", j->id},
             {"state", j->state},
             {"model", ToString(j->request.model)},
             {"size", SizeToJson(j->request.size)},
             {"bitfile", j->bitfile.name},
             {"input_ref", j->input_ref},
             {"output_ref", j->output_ref},
             {"input_bytes", j->input_bytes},
             {"output_bytes", j->output.size()},
             {"submit_time", ToMicros(j->submit_time)},
             {"start_time", TimeOrNull(j->start_time)},
             {"end_time", TimeOrNull(j->end_time)},
             {"error", j->error}};
    if (with_output) row["output_b64"] = Base64Encode(j->output);
    out.push_back(row);
  }
  return {{"jobs", out}};
}

// ---------------------------------------------------------------------------
// Host programs

json Dispatcher::Exec(SessionContext &session, const std::string &user, const Args &args) {
  if (args.contains("service")) {
    const std::string service = args.at("service").get<std::string>();
    const std::vector<uint8_t> input = ReadPayload(args.value("input", json::object()));
    const ServiceResult r = hv_.InvokeService(user, service, input, LocalityOf(session, args));
    json result = PayloadResult(r.output, args.value("output", json::object()));
    result["service"] = service;
    result["input_bytes"] = input.size();
    result["started"] = ToMicros(r.started);
    result["finished"] = ToMicros(r.finished);
    return result;
  }

  const LeaseId id = args.at("lease_id").get<LeaseId>();
  json script;
  if (args.contains("script")) {
    script = args.at("script");
  } else {
    const std::string path = args.at("script_path").get<std::string>();
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read script " + path);
    script = json::parse(in);
  }
  if (!script.is_array()) throw Error(ErrorCode::kBadRequest, "script must be a list of ops");

  const SimTime started = hv_.loop().Now();
  const rc2f::DeviceHandle &h = HandleFor(session, user, id);
  json results = json::array();
  for (size_t i = 0; i < script.size(); ++i) {
    try {
      results.push_back(RunScriptOp(h, script[i]));
    } catch (const Error &e) {
      throw Error(e.code(), "op " + std::to_string(i) + ": " + e.what());
    }
  }
  return {{"lease_id", id},
          {"results", results},
          {"elapsed_us", ToMicros(hv_.loop().Now() - started)}};
}

json Dispatcher::RunScriptOp(const rc2f::DeviceHandle &h, const Args &op) {
  rc2f::Runtime &rt = hv_.runtime();
  const std::string name = op.at("op").get<std::string>();
  // Script slots count from the start of the lease.
  auto slot = [&] {
    const int rel = op.value("slot", 0);
    if (rel < 0 || rel >= static_cast<int>(h.slots.size())) {
      throw Error(ErrorCode::kOutOfRange, "slot " + std::to_string(rel) + " is outside the lease");
    }
    return h.slots[static_cast<size_t>(rel)];
  };
  json r{{"op", name}};
  if (name == "open") {
    r["device_id"] = h.device;
    r["slots"] = h.slots;
    r["endpoints"] = h.Endpoints();
  } else if (name == "ctrl") {
    const rc2f::ControlSignal sig = rc2f::ParseControlSignal(op.at("signal").get<std::string>());
    if (sig == rc2f::ControlSignal::kFullReset) {
      rt.Control(h, sig);
    } else {
      rt.Control(h, sig, slot());
    }
  } else if (name == "kernel_start") {
    rt.KernelStart(h, slot());
  } else if (name == "kernel_stop") {
    rt.KernelStop(h, slot());
  } else if (name == "kernel_status") {
    r.update(ReportToJson(rt.KernelStatus(h, slot())));
  } else if (name == "ucs_rd") {
    r["value"] = rt.UcsRead(h, slot(), op.at("addr").get<int>());
  } else if (name == "ucs_wr") {
    rt.UcsWrite(h, slot(), op.at("addr").get<int>(), op.at("value").get<uint32_t>());
  } else if (name == "gcs_rd") {
    r["value"] = rt.GcsRead(h, op.at("addr").get<int>());
  } else if (name == "gcs_wr") {
    rt.GcsWrite(h, op.at("addr").get<int>(), op.at("value").get<uint32_t>());
  } else if (name == "put") {
    const std::vector<uint8_t> data = ReadPayload(op);
    rt.FifoWrite(h, {h.device, slot(), rc2f::EndpointKind::kIn}, data);
    r["bytes"] = data.size();
  } else if (name == "get") {
    std::optional<uint64_t> n;
    if (op.contains("bytes")) n = op.at("bytes").get<uint64_t>();
    const std::vector<uint8_t> data = rt.FifoRead(h, {h.device, slot(), rc2f::EndpointKind::kOut}, n);
    r.update(PayloadResult(data, op));
  } else {
    throw Error(ErrorCode::kBadRequest, "unknown script op " + name);
  }
  r["sim_time"] = ToMicros(hv_.loop().Now());
  return r;
}

// ---------------------------------------------------------------------------
// Direct runtime access

json Dispatcher::Open(SessionContext &session, const std::string &user, const Args &args) {
  const rc2f::DeviceHandle &h = HandleFor(session, user, args.at("lease_id").get<LeaseId>());
  return {{"lease_id", h.lease_id},
          {"device_id", h.device},
          {"slots", h.slots},
          {"system_scope", h.system_scope},
          {"endpoints", h.Endpoints()}};
}

json Dispatcher::UcsRead(SessionContext &session, const std::string &user, const Args &args) {
  const rc2f::DeviceHandle &h = HandleFor(session, user, args.at("lease_id").get<LeaseId>());
  const rc2f::Endpoint ep = EndpointArg(args);
  if (ep.fpga != h.device) throw Error(ErrorCode::kPermissionDenied, "endpoint on another device");
  const int addr = args.at("addr").get<int>();
  switch (ep.kind) {
    case rc2f::EndpointKind::kGcs: return {{"value", hv_.runtime().GcsRead(h, addr)}};
    case rc2f::EndpointKind::kUcs: return {{"value", hv_.runtime().UcsRead(h, ep.slot, addr)}};
    default: throw Error(ErrorCode::kWrongDirection, ep.ToString() + " is a FIFO");
  }
}

json Dispatcher::UcsWrite(SessionContext &session, const std::string &user, const Args &args) {
  const rc2f::DeviceHandle &h = HandleFor(session, user, args.at("lease_id").get<LeaseId>());
  const rc2f::Endpoint ep = EndpointArg(args);
  if (ep.fpga != h.device) throw Error(ErrorCode::kPermissionDenied, "endpoint on another device");
  const int addr = args.at("addr").get<int>();
  const auto value = args.at("value").get<uint32_t>();
  switch (ep.kind) {
    case rc2f::EndpointKind::kGcs: hv_.runtime().GcsWrite(h, addr, value); break;
    case rc2f::EndpointKind::kUcs: hv_.runtime().UcsWrite(h, ep.slot, addr, value); break;
    default: throw Error(ErrorCode::kWrongDirection, ep.ToString() + " is a FIFO");
  }
  return {{"written", true}};
}

json Dispatcher::Ctrl(SessionContext &session, const std::string &user, const Args &args) {
  const rc2f::DeviceHandle &h = HandleFor(session, user, args.at("lease_id").get<LeaseId>());
  const std::string signal = args.at("signal").get<std::string>();
  std::optional<int> slot;
  if (args.contains("slot")) slot = args.at("slot").get<int>();
  rc2f::Runtime &rt = hv_.runtime();
  auto need_slot = [&] {
    if (!slot) throw Error(ErrorCode::kBadRequest, signal + " needs a slot");
    return *slot;
  };
  if (signal == "kernel_start") {
    rt.KernelStart(h, need_slot());
  } else if (signal == "kernel_stop") {
    rt.KernelStop(h, need_slot());
  } else if (signal == "kernel_status") {
    return ReportToJson(rt.KernelStatus(h, need_slot()));
  } else {
    rt.Control(h, rc2f::ParseControlSignal(signal), slot);
  }
  return {{"signal", signal}};
}

json Dispatcher::Put(SessionContext &session, const std::string &user, const Args &args) {
  const rc2f::DeviceHandle &h = HandleFor(session, user, args.at("lease_id").get<LeaseId>());
  const std::vector<uint8_t> data = ReadPayload(args);
  hv_.runtime().FifoWrite(h, EndpointArg(args), data);
  return {{"bytes", data.size()}};
}

json Dispatcher::Get(SessionContext &session, const std::string &user, const Args &args) {
  const rc2f::DeviceHandle &h = HandleFor(session, user, args.at("lease_id").get<LeaseId>());
  std::optional<uint64_t> n;
  if (args.contains("bytes")) n = args.at("bytes").get<uint64_t>();
  const std::vector<uint8_t> data = hv_.runtime().FifoRead(h, EndpointArg(args), n);
  return PayloadResult(data, args);
}

// ---------------------------------------------------------------------------
// Configuration

ServiceConfig ServiceConfig::FromJson(const json &j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::kConfigError, "config must be an object");
    static const std::set<std::string> kKeys = {"db_path", "listen", "latency_table",
                                                "link_bandwidth_mbps", "time_scale"};
    for (const auto &[key, value] : j.items()) {
      if (!kKeys.count(key)) throw Error(ErrorCode::kConfigError, "unknown config key " + key);
    }
    ServiceConfig c;
    c.db_path = j.value("db_path", std::string());
    c.listen = j.value("listen", c.listen);
    if (j.contains("latency_table")) c.latency = LatencyTable::FromJson(j.at("latency_table"));
    if (j.contains("link_bandwidth_mbps")) {
      c.link_bandwidth_mbps = j.at("link_bandwidth_mbps").get<double>();
      if (!(*c.link_bandwidth_mbps > 0)) {
        throw Error(ErrorCode::kConfigError, "link_bandwidth_mbps must be positive");
      }
    }
    c.time_scale = j.value("time_scale", 0.0);
    if (c.time_scale < 0) throw Error(ErrorCode::kConfigError, "time_scale must be >= 0");
    return c;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
}

ServiceConfig ServiceConfig::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read config " + path.string());
  try {
    return FromJson(json::parse(in));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
}

std::unique_ptr<Hypervisor> MakeHypervisor(const ServiceConfig &config) {
  const bool have_db = !config.db_path.empty() && std::filesystem::exists(config.db_path);
  Fleet fleet = have_db ? Fleet::LoadDb(config.db_path) : DefaultFleet();
  if (config.link_bandwidth_mbps) fleet.SetLinkBandwidth(*config.link_bandwidth_mbps);
  auto hv = std::make_unique<Hypervisor>(std::move(fleet), config.latency);
  hv->loop().set_time_scale(config.time_scale);
  if (!config.db_path.empty()) hv->fleet().SaveDb(config.db_path);
  return hv;
}

}  // namespace rc3e
