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
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rc3e/hypervisor.h"
#include "rc3e/latency.h"
#include "rc3e/rc2f.h"

namespace rc3e {

/// Service configuration file:
/// {db_path, listen, latency_table?, link_bandwidth_mbps?, time_scale?}.
/// `listen` is "tcp://host:port" or "unix:/path". Throws kConfigError.
struct ServiceConfig {
  std::string db_path;
  std::string listen = "tcp://127.0.0.1:7070";
  LatencyTable latency;
  std::optional<double> link_bandwidth_mbps;
  /// Wall seconds slept per simulated second; 0 runs as fast as possible.
  double time_scale = 0.0;

  static ServiceConfig FromJson(const nlohmann::json &j);
  static ServiceConfig Load(const std::filesystem::path &path);
};

/// Per-connection state. The user is whatever the request names; handles
/// opened on this connection are remembered per lease.
struct SessionContext {
  Locality locality = Locality::kRemote;
  std::map<LeaseId, rc2f::DeviceHandle> handles;
};

/// Executes protocol requests against a hypervisor. Requests are
/// {id, cmd, user, args}; responses {id, ok, result | error, sim_time}.
/// Not thread-safe; the server serializes calls.
class Dispatcher {
 public:
  explicit Dispatcher(Hypervisor &hv, std::filesystem::path db_path = {});

  nlohmann::json Handle(SessionContext &session, const nlohmann::json &request);
  /// Parses one line; malformed JSON yields a bad_request response.
  std::string HandleLine(SessionContext &session, std::string_view line);

  Hypervisor &hypervisor() { return hv_; }

 private:
  using Args = nlohmann::json;
  using Result = nlohmann::json;

  Result Dispatch(SessionContext &session, const std::string &cmd, const std::string &user,
                  const Args &args);
  Result Alloc(const std::string &user, const Args &args);
  Result Release(SessionContext &session, const std::string &user, const Args &args);
  Result Configure(SessionContext &session, const std::string &user, const Args &args);
  Result Status(SessionContext &session, const std::string &user, const Args &args);
  Result Exec(SessionContext &session, const std::string &user, const Args &args);
  Result Submit(const std::string &user, const Args &args);
  Result Jobs(const std::string &user, const Args &args);
  Result List(const std::string &user) const;
  Result Open(SessionContext &session, const std::string &user, const Args &args);
  Result UcsRead(SessionContext &session, const std::string &user, const Args &args);
  Result UcsWrite(SessionContext &session, const std::string &user, const Args &args);
  Result Ctrl(SessionContext &session, const std::string &user, const Args &args);
  Result Put(SessionContext &session, const std::string &user, const Args &args);
  Result Get(SessionContext &session, const std::string &user, const Args &args);

  const rc2f::DeviceHandle &HandleFor(SessionContext &session, const std::string &user,
                                      LeaseId lease_id);
  Result RunScriptOp(const rc2f::DeviceHandle &h, const Args &op);
  Bitfile ResolveBitfile(const Args &ref) const;
  Locality LocalityOf(const SessionContext &session, const Args &args) const;
  void Persist();

  Hypervisor &hv_;
  std::filesystem::path db_path_;
};

/// Loads the device database (or builds the default two-node fleet when the
/// file does not exist) and applies the configuration overrides.
std::unique_ptr<Hypervisor> MakeHypervisor(const ServiceConfig &config);

/// Newline-delimited JSON over TCP or a unix socket, one thread per
/// connection, every request serialized through one dispatcher.
class Server {
 public:
  explicit Server(const ServiceConfig &config);
  ~Server();
  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  /// Binds and starts accepting. Throws kBindError.
  void Start();
  /// Blocks until Stop().
  void Wait();
  void Stop();

  /// Bound TCP port (useful with port 0); 0 for unix sockets.
  uint16_t port() const { return port_; }
  std::string address() const;
  Hypervisor &hypervisor() { return *hv_; }

 private:
  struct Impl;

  std::string ServeLine(SessionContext &session, std::string_view line);

  ServiceConfig config_;
  std::unique_ptr<Hypervisor> hv_;
  std::unique_ptr<Dispatcher> dispatcher_;
  std::mutex mu_;
  std::unique_ptr<Impl> impl_;
  uint16_t port_ = 0;
};

/// Blocking client for the line protocol. Addresses: "tcp://host:port",
/// "host:port" or "unix:/path".
class Client {
 public:
  explicit Client(const std::string &address);
  ~Client();
  Client(const Client &) = delete;
  Client &operator=(const Client &) = delete;

  /// Sends one request and returns the raw response object.
  nlohmann::json Call(const std::string &cmd, const std::string &user,
                      const nlohmann::json &args = nlohmann::json::object());
  /// Sends a raw line, returns the raw reply line.
  std::string RoundTrip(const std::string &line);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  uint64_t next_id_ = 1;
};

std::string Base64Encode(std::span<const uint8_t> bytes);
std::vector<uint8_t> Base64Decode(std::string_view text);

}  // namespace rc3e
