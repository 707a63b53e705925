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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "rc3e/error.h"
#include "rc3e/kernels.h"
#include "rc3e/middleware.h"

namespace {

using nlohmann::json;

constexpr int kServiceError = 1;
constexpr int kUsageError = 2;

struct Options {
  bool as_json = false;
  bool local = false;
  std::string user;
  std::string addr;
};

std::string EnvOr(const char *name, const std::string &fallback) {
  const char *v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

std::vector<uint8_t> ReadBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rc3e::Error(rc3e::ErrorCode::kIoError, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBytes(const std::string &path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw rc3e::Error(rc3e::ErrorCode::kIoError, "cannot write " + path);
}

// A bitfile argument is a local descriptor file, or the name of a built-in
// design that the service resolves.
json BitfileArg(const std::string &arg) {
  std::ifstream in(arg);
  if (!in) return arg;
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw rc3e::Error(rc3e::ErrorCode::kInvalidBitfile, arg + ": " + e.what());
  }
}

// Builds {data_b64} from a local file or {batch} from "n,count[,seed]".
json PayloadArg(const std::string &input, const std::string &batch) {
  if (!input.empty()) return {{"data_b64", rc3e::Base64Encode(ReadBytes(input))}};
  std::vector<uint64_t> v;
  std::stringstream ss(batch);
  for (std::string item; std::getline(ss, item, ',');) v.push_back(std::stoull(item));
  if (v.size() < 2 || v.size() > 3) {
    throw rc3e::Error(rc3e::ErrorCode::kInvalidArgument, "--batch wants n,count[,seed]");
  }
  return {{"batch", {{"n", v[0]}, {"count", v[1]}, {"seed", v.size() == 3 ? v[2] : 1}}}};
}

// Writes returned data_b64 to `path` and replaces it by a byte count.
void SaveOutput(json &result, const std::string &path, const char *key = "data_b64") {
  if (!result.contains(key)) return;
  const auto bytes = rc3e::Base64Decode(result[key].get<std::string>());
  if (!path.empty()) WriteBytes(path, bytes);
  result.erase(key);
  result["bytes"] = bytes.size();
}

class Cli {
 public:
  explicit Cli(const Options &opt) : opt_(opt) {}

  json Call(const std::string &cmd, json args) {
    if (opt_.local && !args.contains("locality")) args["locality"] = "local";
    if (!client_) client_ = std::make_unique<rc3e::Client>(opt_.addr);
    json response = client_->Call(cmd, opt_.user, args);
    if (!response.value("ok", false)) {
      const json &err = response["error"];
      throw ServiceError{err.value("code", "internal"), err.value("message", "")};
    }
    return response["result"];
  }

  struct ServiceError {
    std::string code;
    std::string message;
  };

 private:
  const Options &opt_;
  std::unique_ptr<rc3e::Client> client_;
};

void PrintHuman(const std::string &cmd, const json &r) {
  if (cmd == "alloc") {
    std::cout << "lease " << r["lease_id"] << " on fpga" << r["device_id"] << " slots "
              << r["slots"].dump() << "\n";
  } else if (cmd == "release") {
    std::cout << "released lease " << r["lease_id"] << "\n";
  } else if (cmd == "configure") {
    std::cout << r["bitfile"].get<std::string>() << " loaded (" << r["kind"].get<std::string>()
              << ", " << r["path"].get<std::string>() << ") in "
              << r["duration_us"].get<int64_t>() / 1000.0 << " ms\n";
  } else if (cmd == "status") {
    std::cout << "fpga" << r["device_id"] << " " << r["power"].get<std::string>() << " "
              << r["mode"].get<std::string>();
    if (!r["full_design"].is_null()) std::cout << " " << r["full_design"].get<std::string>();
    std::cout << "\n";
    for (const auto &s : r["slots"]) {
      std::cout << "  v" << s["index"] << " " << s["state"].get<std::string>();
      if (!s["design"].is_null()) std::cout << " " << s["design"].get<std::string>();
      std::cout << "\n";
    }
  } else if (cmd == "list") {
    for (const auto &d : r["devices"]) {
      std::cout << "fpga" << d["id"] << " node" << d["node_id"] << " "
                << d["model"].get<std::string>() << " " << d["power"].get<std::string>() << " "
                << d["mode"].get<std::string>() << " [";
      bool first = true;
      for (const auto &s : d["slots"]) {
        std::cout << (first ? "" : " ") << s["state"].get<std::string>();
        first = false;
      }
      std::cout << "]\n";
    }
  } else if (cmd == "jobs") {
    for (const auto &j : r["jobs"]) {
      std::cout << "job " << j["job_id"] << " " << j["state"].get<std::string>() << " "
                << j["bitfile"].get<std::string>();
      if (!j["error"].get<std::string>().empty()) std::cout << " " << j["error"].get<std::string>();
      std::cout << "\n";
    }
  } else if (cmd == "submit") {
    std::cout << "job " << r["job_id"] << " " << r["state"].get<std::string>() << "\n";
  } else if (cmd == "exec" && r.contains("results")) {
    for (const auto &op : r["results"]) {
      std::cout << op["op"].get<std::string>();
      for (const char *k : {"value", "bytes", "activity"}) {
        if (op.contains(k)) std::cout << " " << k << "=" << op[k].dump();
      }
      std::cout << "\n";
    }
    std::cout << "elapsed " << r["elapsed_us"].get<int64_t>() / 1000.0 << " ms\n";
  } else {
    std::cout << r.dump() << "\n";
  }
}

int Serve(const std::string &config_path, const std::string &listen, const std::string &db) {
  rc3e::ServiceConfig config =
      config_path.empty() ? rc3e::ServiceConfig{} : rc3e::ServiceConfig::Load(config_path);
  if (!listen.empty()) config.listen = listen;
  if (!db.empty()) config.db_path = db;
  rc3e::Server server(config);
  server.Start();
  std::cerr << "rc3e serving on " << server.address() << std::endl;
  server.Wait();
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  Options opt;
  opt.user = EnvOr("RC3E_USER", EnvOr("USER", "anonymous"));
  opt.addr = EnvOr("RC3E_ADDR", "tcp://127.0.0.1:7070");

  CLI::App app{"rc3e: FPGA cloud resource manager client"};
  app.require_subcommand(1);
  app.add_flag("--json", opt.as_json, "Print machine-readable results");
  app.add_flag("--local", opt.local, "Issue calls from the FPGA's own node");
  app.add_option("--user", opt.user, "User name");
  app.add_option("--addr", opt.addr, "Service address (tcp://host:port or unix:/path)");

  std::string model = "raaas";
  int slots = 1;
  bool whole = false;
  uint64_t lease = 0;
  std::string bitfile, input, batch, output, script, service, endpoint, config, listen, db;
  uint64_t job_id = 0;
  uint64_t nbytes = 0;
  bool wait = false;
  uint32_t gen_n = 16;
  uint64_t gen_count = 1000;
  uint64_t gen_seed = 1;

  auto *alloc = app.add_subcommand("alloc", "Lease a vFPGA span or a whole device");
  alloc->add_option("--model", model, "rsaas, raaas or baaas");
  alloc->add_option("--slots", slots, "Regions to lease (1, 2 or 4)");
  alloc->add_flag("--whole", whole, "Lease a whole device");

  auto *release = app.add_subcommand("release", "Return a lease");
  release->add_option("lease", lease)->required();

  auto *configure = app.add_subcommand("configure", "Load a bitfile into a lease");
  configure->add_option("lease", lease)->required();
  configure->add_option("--bitfile", bitfile, "Descriptor file or built-in design")->required();

  auto *status = app.add_subcommand("status", "Show the device behind a lease");
  status->add_option("lease", lease)->required();

  auto *exec = app.add_subcommand("exec", "Run a host script on a lease, or a service");
  exec->add_option("lease", lease);
  exec->add_option("--script", script, "JSON list of operations");
  exec->add_option("--service", service, "Background service to invoke instead");
  exec->add_option("--input", input, "Service input file");
  exec->add_option("--batch", batch, "Generated service input n,count[,seed]");
  exec->add_option("--output", output, "Service output file");

  auto *submit = app.add_subcommand("submit", "Queue a batch job");
  submit->add_option("--bitfile", bitfile)->required();
  submit->add_option("--input", input, "Input file");
  submit->add_option("--batch", batch, "Generated input n,count[,seed]");
  submit->add_option("--model", model);
  submit->add_option("--slots", slots);
  submit->add_flag("--whole", whole);
  submit->add_option("--output-ref", output, "Path the service writes the output to");

  auto *jobs = app.add_subcommand("jobs", "Show batch jobs");
  jobs->add_option("--id", job_id);
  jobs->add_flag("--wait", wait, "Run until no job is running");
  jobs->add_option("--output", output, "Save the output of --id to a file");

  auto *list = app.add_subcommand("list", "Show the fleet");

  auto *put = app.add_subcommand("put", "Write to an in-FIFO");
  put->add_option("lease", lease)->required();
  put->add_option("endpoint", endpoint)->required();
  put->add_option("--input", input);
  put->add_option("--batch", batch);

  auto *get = app.add_subcommand("get", "Read from an out-FIFO");
  get->add_option("lease", lease)->required();
  get->add_option("endpoint", endpoint)->required();
  get->add_option("--bytes", nbytes, "Bytes to read (default: all produced)");
  get->add_option("--output", output, "File to write")->required();

  auto *gen = app.add_subcommand("gen-batch", "Write a random matrix batch");
  gen->add_option("--n", gen_n)->check(CLI::IsMember({16, 32}));
  gen->add_option("--count", gen_count);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--output", output)->required();

  auto *serve = app.add_subcommand("serve", "Run the service");
  serve->add_option("--config", config, "Service config file");
  serve->add_option("--listen", listen, "Override the listen address");
  serve->add_option("--db", db, "Override the device database path");

  try {
    app.parse(argc, argv);
    for (auto *sub : {exec, put, submit}) {
      if (!sub->parsed()) continue;
      const bool svc = sub == exec && script.empty();
      if (sub == exec && script.empty() == service.empty()) {
        throw CLI::ValidationError("exec", "give either --script or --service");
      }
      if ((sub != exec || svc) && input.empty() == batch.empty()) {
        throw CLI::ValidationError(sub->get_name(), "give exactly one of --input or --batch");
      }
      if (sub == exec && !svc && lease == 0) {
        throw CLI::ValidationError("exec", "a script needs a lease");
      }
    }
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (serve->parsed()) return Serve(config, listen, db);
    if (gen->parsed()) {
      const auto bytes = rc3e::GenerateMatrixBatch(gen_n, gen_count, gen_seed);
      WriteBytes(output, bytes);
      if (opt.as_json) {
        std::cout << json{{"bytes", bytes.size()}, {"path", output}}.dump() << "\n";
      } else {
        std::cout << "wrote " << bytes.size() << " bytes to " << output << "\n";
      }
      return 0;
    }

    Cli cli(opt);
    std::string cmd;
    json result;
    if (alloc->parsed()) {
      cmd = "alloc";
      result = cli.Call("ALLOC", {{"model", model}, {"slots", slots}, {"whole", whole}});
    } else if (release->parsed()) {
      cmd = "release";
      result = cli.Call("RELEASE", {{"lease_id", lease}});
    } else if (configure->parsed()) {
      cmd = "configure";
      result = cli.Call("CONFIGURE", {{"lease_id", lease}, {"bitfile", BitfileArg(bitfile)}});
    } else if (status->parsed()) {
      cmd = "status";
      result = cli.Call("STATUS", {{"lease_id", lease}});
    } else if (exec->parsed()) {
      cmd = "exec";
      if (!service.empty()) {
        result = cli.Call("EXEC", {{"service", service}, {"input", PayloadArg(input, batch)}});
        SaveOutput(result, output);
      } else {
        json ops = json::parse(ReadBytes(script));
        // File paths in the script are client-side: inline puts, collect gets.
        std::map<size_t, std::string> get_paths;
        for (size_t i = 0; i < ops.size(); ++i) {
          json &op = ops[i];
          if (!op.contains("path")) continue;
          const std::string path = op["path"].get<std::string>();
          op.erase("path");
          if (op.value("op", "") == "put") {
            op["data_b64"] = rc3e::Base64Encode(ReadBytes(path));
          } else if (op.value("op", "") == "get") {
            get_paths[i] = path;
          }
        }
        result = cli.Call("EXEC", {{"lease_id", lease}, {"script", ops}});
        for (size_t i = 0; i < result["results"].size(); ++i) {
          auto it = get_paths.find(i);
          SaveOutput(result["results"][i], it == get_paths.end() ? "" : it->second);
        }
      }
    } else if (submit->parsed()) {
      cmd = "submit";
      json args{{"model", model},
                {"slots", slots},
                {"whole", whole},
                {"bitfile", BitfileArg(bitfile)},
                {"input", PayloadArg(input, batch)},
                {"input_ref", input.empty() ? "batch:" + batch : input}};
      if (!output.empty()) args["output_path"] = output;
      result = cli.Call("SUBMIT", args);
    } else if (jobs->parsed()) {
      cmd = "jobs";
      json args{{"wait", wait}};
      if (job_id != 0) args["job_id"] = job_id;
      if (!output.empty()) {
        if (job_id == 0) throw rc3e::Error(rc3e::ErrorCode::kInvalidArgument, "--output needs --id");
        args["include_output"] = true;
      }
      result = cli.Call("JOBS", args);
      for (auto &j : result["jobs"]) SaveOutput(j, output, "output_b64");
    } else if (list->parsed()) {
      cmd = "list";
      result = cli.Call("LIST", json::object());
    } else if (put->parsed()) {
      cmd = "put";
      json args = PayloadArg(input, batch);
      args["lease_id"] = lease;
      args["endpoint"] = endpoint;
      result = cli.Call("PUT", args);
    } else if (get->parsed()) {
      cmd = "get";
      json args{{"lease_id", lease}, {"endpoint", endpoint}};
      if (nbytes != 0) args["bytes"] = nbytes;
      result = cli.Call("GET", args);
      SaveOutput(result, output);
    }

    if (opt.as_json) {
      std::cout << (cmd == "list" ? result["devices"] : result).dump(2) << "\n";
    } else {
      PrintHuman(cmd, result);
    }
    return 0;
  } catch (const Cli::ServiceError &e) {
    std::cerr << "error: " << e.code << ": " << e.message << "\n";
    return kServiceError;
  } catch (const rc3e::Error &e) {
    std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    return e.code() == rc3e::ErrorCode::kInvalidArgument ? kUsageError : kServiceError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kServiceError;
  }
}
