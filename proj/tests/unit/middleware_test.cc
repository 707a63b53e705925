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

#include <gtest/gtest.h>

#include <random>

#include "matmul_ref.h"
#include "rc3e/kernels.h"
#include "test_util.h"

namespace rc3e {
namespace {

using nlohmann::json;

class DispatcherTest : public ::testing::Test {
 protected:
  DispatcherTest() : hv_(DefaultFleet()), d_(hv_) {}

  json Call(const std::string &user, const std::string &cmd, json args = json::object(),
            SessionContext *session = nullptr) {
    json req{{"id", next_id_++}, {"cmd", cmd}, {"user", user}, {"args", args}};
    json resp = d_.Handle(session != nullptr ? *session : session_, req);
    EXPECT_EQ(resp["id"], req["id"]);
    return resp;
  }

  json Ok(const std::string &user, const std::string &cmd, json args = json::object()) {
    json resp = Call(user, cmd, std::move(args));
    EXPECT_TRUE(resp["ok"].get<bool>()) << resp.dump();
    return resp["result"];
  }

  std::string ErrorOf(const std::string &user, const std::string &cmd, json args = json::object()) {
    json resp = Call(user, cmd, std::move(args));
    EXPECT_FALSE(resp["ok"].get<bool>()) << resp.dump();
    return resp["error"].value("code", "");
  }

  int64_t Now() const { return ToMicros(hv_.loop().Now()); }

  Hypervisor hv_;
  Dispatcher d_;
  SessionContext session_;
  int next_id_ = 1;
};

TEST_F(DispatcherTest, MalformedInputKeepsTheSession) {
  const json bad = json::parse(d_.HandleLine(session_, "{oops"));
  EXPECT_FALSE(bad["ok"].get<bool>());
  EXPECT_EQ(bad["error"]["code"], "bad_request");
  EXPECT_TRUE(bad["id"].is_null());
  EXPECT_EQ(json::parse(d_.HandleLine(session_, "[1,2]"))["error"]["code"], "bad_request");
  EXPECT_EQ(ErrorOf("alice", "FROBNICATE"), "unknown_cmd");
  EXPECT_EQ(ErrorOf("alice", "RELEASE", {{"lease_id", "seven"}}), "bad_request");
  EXPECT_EQ(ErrorOf("alice", "RELEASE"), "bad_request");
  const json no_user = d_.Handle(session_, {{"id", "x"}, {"cmd", "LIST"}});
  EXPECT_EQ(no_user["id"], "x");
  EXPECT_EQ(no_user["error"]["code"], "bad_request");
  EXPECT_TRUE(Call("alice", "LIST")["ok"].get<bool>());
}

TEST_F(DispatcherTest, ListShowsTheDefaultFleet) {
  const json r = Ok("alice", "LIST");
  EXPECT_EQ(r["devices"].size(), 4u);
  EXPECT_EQ(r["nodes"].size(), 2u);
  for (const auto &d : r["devices"]) EXPECT_EQ(d["power"], "clock_gated");
  EXPECT_EQ(r["services"], (json{"loopback", "matmul16", "matmul32"}));
}

TEST_F(DispatcherTest, AllocateProgramStatusTiming) {
  const json a = Ok("alice", "ALLOC", {{"model", "raaas"}, {"slots", 1}});
  EXPECT_EQ(Now(), 0);
  const json c = Ok("alice", "CONFIGURE", {{"lease_id", a["lease_id"]}, {"bitfile", "matmul16"}});
  EXPECT_EQ(c["duration_us"], 912'000);
  Ok("alice", "STATUS", {{"lease_id", a["lease_id"]}});
  EXPECT_EQ(Now(), 992'000);
  const json resp = Call("alice", "STATUS", {{"lease_id", a["lease_id"]}, {"locality", "local"}});
  EXPECT_EQ(resp["sim_time"], 1'003'000);
}

TEST_F(DispatcherTest, LocalityPricesStatus) {
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  const json remote = Ok("alice", "STATUS", {{"lease_id", a["lease_id"]}});
  const json local = Ok("alice", "STATUS", {{"lease_id", a["lease_id"]}, {"locality", "local"}});
  EXPECT_EQ(remote["latency_us"].get<int64_t>() - local["latency_us"].get<int64_t>(), 69'000);
  session_.locality = Locality::kLocal;
  EXPECT_EQ(Ok("alice", "STATUS", {{"lease_id", a["lease_id"]}})["latency_us"], 11'000);
}

TEST_F(DispatcherTest, ReadsDoNotMutate) {
  const json a = Ok("alice", "ALLOC", {{"slots", 2}});
  Ok("alice", "SUBMIT", {{"bitfile", "matmul16"}, {"input", {{"batch", {{"n", 16}, {"count", 5}}}}}});
  const std::string before = hv_.StateDigest();
  Ok("alice", "STATUS", {{"lease_id", a["lease_id"]}});
  Ok("alice", "LIST");
  Ok("alice", "JOBS");
  Ok("bob", "LIST");
  EXPECT_EQ(hv_.StateDigest(), before);
}

TEST_F(DispatcherTest, ListHidesOtherTenants) {
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  Ok("alice", "CONFIGURE", {{"lease_id", a["lease_id"]}, {"bitfile", "matmul16"}});
  const json seen_by_bob = Ok("bob", "LIST");
  const json slot = seen_by_bob["devices"][0]["slots"][0];
  EXPECT_EQ(slot["state"], "configured");
  EXPECT_FALSE(slot.contains("lease_id"));
  EXPECT_FALSE(slot.contains("design"));
  EXPECT_TRUE(seen_by_bob["leases"].empty());
  const json seen_by_alice = Ok("alice", "LIST");
  EXPECT_EQ(seen_by_alice["devices"][0]["slots"][0]["design"], "matmul16");
  EXPECT_EQ(seen_by_alice["leases"].size(), 1u);
}

TEST_F(DispatcherTest, ExecScriptStreamsMatmul) {
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  Ok("alice", "CONFIGURE", {{"lease_id", a["lease_id"]}, {"bitfile", "matmul16"}});
  const json script = json::array({
      {{"op", "open"}},
      {{"op", "ucs_wr"}, {"addr", 1}, {"value", 3}},
      {{"op", "kernel_start"}},
      {{"op", "put"}, {"batch", {{"n", 16}, {"count", 1000}, {"seed", 8}}}},
      {{"op", "get"}},
      {{"op", "kernel_status"}},
      {{"op", "ucs_rd"}, {"addr", 1}},
  });
  const json r = Ok("alice", "EXEC", {{"lease_id", a["lease_id"]}, {"script", script}});
  const auto &res = r["results"];
  ASSERT_EQ(res.size(), 7u);
  EXPECT_EQ(res[0]["endpoints"][1], "fpga0/v0/in");
  EXPECT_EQ(res[6]["value"], 3);
  EXPECT_EQ(res[5]["activity"], "done");
  const auto out = Base64Decode(res[4]["data_b64"].get<std::string>());
  EXPECT_LE(testing::MaxRelativeError(GenerateMatrixBatch(16, 1000, 8), out, 16), 1e-5);
  // Two ucs accesses, two gcs accesses, 2,048,000 bytes at 509 MB/s.
  EXPECT_EQ(r["elapsed_us"], 2 * 208 + 2 * 198 + 4024);
}

TEST_F(DispatcherTest, ScriptErrorsNameTheOp) {
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  const json resp = Call("alice", "EXEC",
                         {{"lease_id", a["lease_id"]},
                          {"script", json::array({{{"op", "open"}}, {{"op", "kernel_start"}}})}});
  EXPECT_EQ(resp["error"]["code"], "not_configured");
  EXPECT_NE(resp["error"]["message"].get<std::string>().find("op 1"), std::string::npos);
  EXPECT_EQ(ErrorOf("alice", "EXEC",
                    {{"lease_id", a["lease_id"]},
                     {"script", json::array({{{"op", "ucs_rd"}, {"slot", 1}, {"addr", 0}}})}}),
            "out_of_range");
}

TEST_F(DispatcherTest, BackgroundServiceNeedsNoLease) {
  const json r = Ok("carol", "EXEC",
                    {{"service", "matmul32"},
                     {"input", {{"batch", {{"n", 32}, {"count", 20}, {"seed", 1}}}}}});
  const auto out = Base64Decode(r["data_b64"].get<std::string>());
  EXPECT_LE(testing::MaxRelativeError(GenerateMatrixBatch(32, 20, 1), out, 32), 1e-5);
  EXPECT_FALSE(r.contains("lease_id"));
  EXPECT_TRUE(Ok("carol", "LIST")["leases"].empty());
  EXPECT_EQ(ErrorOf("carol", "EXEC", {{"service", "nope"}, {"input", {{"data_b64", ""}}}}),
            "unknown_service");
}

TEST_F(DispatcherTest, DirectEndpointCommands) {
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  const LeaseId id = a["lease_id"];
  Ok("alice", "CONFIGURE", {{"lease_id", id}, {"bitfile", "loopback"}});
  const json opened = Ok("alice", "OPEN", {{"lease_id", id}});
  EXPECT_EQ(opened["endpoints"].size(), 3u);
  Ok("alice", "UCS_WR", {{"lease_id", id}, {"endpoint", "fpga0/v0/ucs"}, {"addr", 2}, {"value", 11}});
  EXPECT_EQ(Ok("alice", "UCS_RD", {{"lease_id", id}, {"endpoint", "fpga0/v0/ucs"}, {"addr", 2}})["value"], 11);
  EXPECT_EQ(ErrorOf("alice", "UCS_RD", {{"lease_id", id}, {"endpoint", "fpga0/gcs"}, {"addr", 0}}),
            "permission_denied");
  Ok("alice", "CTRL", {{"lease_id", id}, {"signal", "kernel_start"}, {"slot", 0}});
  const std::vector<uint8_t> data{1, 2, 3, 4, 5};
  Ok("alice", "PUT", {{"lease_id", id}, {"endpoint", "fpga0/v0/in"}, {"data_b64", Base64Encode(data)}});
  const json got = Ok("alice", "GET", {{"lease_id", id}, {"endpoint", "fpga0/v0/out"}});
  EXPECT_EQ(Base64Decode(got["data_b64"].get<std::string>()), data);
  EXPECT_EQ(ErrorOf("alice", "GET", {{"lease_id", id}, {"endpoint", "fpga0/v0/in"}}),
            "wrong_direction");
  EXPECT_EQ(ErrorOf("alice", "PUT", {{"lease_id", id}, {"endpoint", "fpga0/v0/in"}}), "bad_request");
  Ok("alice", "RELEASE", {{"lease_id", id}});
  EXPECT_EQ(ErrorOf("alice", "OPEN", {{"lease_id", id}}), "unknown_lease");
}

TEST_F(DispatcherTest, JobsLifecycle) {
  const json s = Ok("dave", "SUBMIT",
                    {{"bitfile", "matmul16"},
                     {"input", {{"batch", {{"n", 16}, {"count", 50}}}}},
                     {"input_ref", "gen"}});
  EXPECT_EQ(s["state"], "running");
  EXPECT_EQ(Ok("dave", "JOBS")["jobs"][0]["state"], "running");
  EXPECT_TRUE(Ok("erin", "JOBS")["jobs"].empty());
  EXPECT_EQ(ErrorOf("erin", "JOBS", {{"job_id", s["job_id"]}}), "permission_denied");
  const json done = Ok("dave", "JOBS", {{"wait", true}, {"job_id", s["job_id"]}, {"include_output", true}});
  EXPECT_EQ(done["jobs"][0]["state"], "done");
  EXPECT_EQ(Base64Decode(done["jobs"][0]["output_b64"].get<std::string>()).size(), 50u * 1024);
  EXPECT_EQ(ErrorOf("dave", "SUBMIT", {{"bitfile", "matmul16"}, {"slots", 2},
                                      {"input", {{"data_b64", ""}}}}),
            "invalid_bitfile");
}

TEST_F(DispatcherTest, SimTimeNeverDecreases) {
  std::mt19937_64 rng(5);
  int64_t last = 0;
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  for (int i = 0; i < 50; ++i) {
    const char *cmds[] = {"LIST", "STATUS", "JOBS", "NOPE"};
    const json resp = Call("alice", cmds[rng() % 4], {{"lease_id", a["lease_id"]}});
    EXPECT_GE(resp["sim_time"].get<int64_t>(), last);
    last = resp["sim_time"];
  }
}

TEST_F(DispatcherTest, TenantsCannotTouchEachOther) {
  std::mt19937_64 rng(11);
  const json a = Ok("alice", "ALLOC", {{"slots", 1}});
  const LeaseId id = a["lease_id"];
  Ok("alice", "CONFIGURE", {{"lease_id", id}, {"bitfile", "loopback"}});
  Ok("alice", "UCS_WR", {{"lease_id", id}, {"endpoint", "fpga0/v0/ucs"}, {"addr", 0}, {"value", 42}});
  auto alice_view = [&] {
    json s = Ok("alice", "STATUS", {{"lease_id", id}});
    s.erase("at");
    const json v = Ok("alice", "UCS_RD", {{"lease_id", id}, {"endpoint", "fpga0/v0/ucs"}, {"addr", 0}});
    return json{s, v};
  };
  const json before = alice_view();
  SessionContext mallory_session;
  const std::vector<json> attacks = {
      {{"cmd", "RELEASE"}, {"args", {{"lease_id", id}}}},
      {{"cmd", "CONFIGURE"}, {"args", {{"lease_id", id}, {"bitfile", "matmul16"}}}},
      {{"cmd", "STATUS"}, {"args", {{"lease_id", id}}}},
      {{"cmd", "OPEN"}, {"args", {{"lease_id", id}}}},
      {{"cmd", "UCS_WR"}, {"args", {{"lease_id", id}, {"endpoint", "fpga0/v0/ucs"}, {"addr", 0}, {"value", 1}}}},
      {{"cmd", "UCS_RD"}, {"args", {{"lease_id", id}, {"endpoint", "fpga0/v0/ucs"}, {"addr", 0}}}},
      {{"cmd", "CTRL"}, {"args", {{"lease_id", id}, {"signal", "user_reset"}, {"slot", 0}}}},
      {{"cmd", "PUT"}, {"args", {{"lease_id", id}, {"endpoint", "fpga0/v0/in"}, {"data_b64", "AAAA"}}}},
      {{"cmd", "GET"}, {"args", {{"lease_id", id}, {"endpoint", "fpga0/v0/out"}}}},
      {{"cmd", "EXEC"}, {"args", {{"lease_id", id}, {"script", json::array({{{"op", "open"}}})}}}},
  };
  for (int i = 0; i < 200; ++i) {
    json req = attacks[rng() % attacks.size()];
    req["id"] = i;
    req["user"] = "mallory";
    if (rng() % 2 == 0) {
      const json own = Ok("mallory", "ALLOC", {{"slots", 1}});
      Ok("mallory", "RELEASE", {{"lease_id", own["lease_id"]}});
    }
    const json resp = d_.Handle(mallory_session, req);
    ASSERT_FALSE(resp["ok"].get<bool>()) << req.dump();
    EXPECT_EQ(resp["error"]["code"], "permission_denied") << req.dump();
  }
  EXPECT_EQ(alice_view(), before);
}

TEST(ServiceConfigTest, ParsesAndRejects) {
  const ServiceConfig c = ServiceConfig::FromJson(
      {{"db_path", "/tmp/x.json"}, {"listen", "unix:/tmp/s"}, {"latency_table", {{"pr_remote", 1000}}},
       {"link_bandwidth_mbps", 1600}, {"time_scale", 0}});
  EXPECT_EQ(c.listen, "unix:/tmp/s");
  EXPECT_EQ(c.latency.pr_remote, SimDuration(1'000'000));
  EXPECT_EQ(*c.link_bandwidth_mbps, 1600.0);
  EXPECT_RC3E_ERROR(ServiceConfig::FromJson({{"bogus", 1}}), ErrorCode::kConfigError);
  EXPECT_RC3E_ERROR(ServiceConfig::FromJson({{"link_bandwidth_mbps", -1}}), ErrorCode::kConfigError);
  EXPECT_RC3E_ERROR(ServiceConfig::FromJson({{"listen", 5}}), ErrorCode::kConfigError);
  EXPECT_RC3E_ERROR(ServiceConfig::Load("/nonexistent/rc3e.json"), ErrorCode::kConfigError);
}

TEST(Base64Test, RoundTrip) {
  for (size_t n = 0; n < 10; ++n) {
    std::vector<uint8_t> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = static_cast<uint8_t>(250 + i);
    EXPECT_EQ(Base64Decode(Base64Encode(v)), v);
  }
  EXPECT_EQ(Base64Encode(std::vector<uint8_t>{'h', 'i'}), "aGk=");
  EXPECT_RC3E_ERROR(Base64Decode("a*=="), ErrorCode::kBadRequest);
  EXPECT_RC3E_ERROR(Base64Decode("abc"), ErrorCode::kBadRequest);
}

}  // namespace
}  // namespace rc3e
