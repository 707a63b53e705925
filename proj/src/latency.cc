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

#include "rc3e/latency.h"

#include <string>

#include "rc3e/error.h"

namespace rc3e {

using nlohmann::json;

LatencyKind ParseLatencyKind(std::string_view name) {
  if (name == "status") return LatencyKind::kStatus;
  if (name == "config_full") return LatencyKind::kConfigFull;
  if (name == "pr") return LatencyKind::kPartialReconfig;
  if (name == "gcs_access") return LatencyKind::kGcsAccess;
  if (name == "ucs_access") return LatencyKind::kUcsAccess;
  throw Error(ErrorCode::kUnknownKind, "unknown latency kind: " + std::string(name));
}

Locality ParseLocality(std::string_view name) {
  if (name == "local") return Locality::kLocal;
  if (name == "remote") return Locality::kRemote;
  throw Error(ErrorCode::kInvalidArgument, "locality must be local or remote");
}

const char *ToString(Locality l) { return l == Locality::kLocal ? "local" : "remote"; }

SimDuration LatencyTable::Charge(LatencyKind kind, Locality path, int vslot_count) const {
  const bool local = path == Locality::kLocal;
  switch (kind) {
    case LatencyKind::kStatus: return local ? status_local : status_remote;
    case LatencyKind::kConfigFull: return local ? config_full_local : config_full_remote;
    case LatencyKind::kPartialReconfig: return local ? pr_local : pr_remote;
    case LatencyKind::kGcsAccess: return gcs_access;
    case LatencyKind::kUcsAccess:
      if (vslot_count <= 1) return ucs_access_1;
      if (vslot_count == 2) return ucs_access_2;
      return ucs_access_4;
  }
  throw Error(ErrorCode::kUnknownKind, "unknown latency kind");
}

void LatencyTable::Validate() const {
  for (SimDuration d : {status_local, status_remote, config_full_local, config_full_remote,
                        pr_local, pr_remote, gcs_access, ucs_access_1, ucs_access_2,
                        ucs_access_4}) {
    if (d <= SimDuration::zero()) {
      throw Error(ErrorCode::kConfigError, "latency entries must be positive");
    }
  }
  if (status_remote < status_local || config_full_remote < config_full_local ||
      pr_remote < pr_local) {
    throw Error(ErrorCode::kConfigError, "remote latency must not be below local latency");
  }
}

LatencyTable LatencyTable::FromJson(const json &overrides) {
  LatencyTable t;
  if (overrides.is_null()) return t;
  if (!overrides.is_object()) throw Error(ErrorCode::kConfigError, "latency_table must be an object");
  auto ms = [](const json &v, const std::string &key) {
    if (!v.is_number()) throw Error(ErrorCode::kConfigError, key + " must be a number of ms");
    return MillisToDuration(v.get<double>());
  };
  for (const auto &[key, value] : overrides.items()) {
    if (key == "status_local") t.status_local = ms(value, key);
    else if (key == "status_remote") t.status_remote = ms(value, key);
    else if (key == "config_full_local") t.config_full_local = ms(value, key);
    else if (key == "config_full_remote") t.config_full_remote = ms(value, key);
    else if (key == "pr_local") t.pr_local = ms(value, key);
    else if (key == "pr_remote") t.pr_remote = ms(value, key);
    else if (key == "gcs_access") t.gcs_access = ms(value, key);
    else if (key == "ucs_access_by_count") {
      if (!value.is_object()) throw Error(ErrorCode::kConfigError, key + " must be an object");
      for (const auto &[count, v] : value.items()) {
        if (count == "1") t.ucs_access_1 = ms(v, key);
        else if (count == "2") t.ucs_access_2 = ms(v, key);
        else if (count == "4") t.ucs_access_4 = ms(v, key);
        else throw Error(ErrorCode::kConfigError, "ucs_access_by_count keys are 1, 2 and 4");
      }
    } else {
      throw Error(ErrorCode::kConfigError, "unknown latency_table key: " + key);
    }
  }
  t.Validate();
  return t;
}

json LatencyTable::ToJson() const {
  auto ms = [](SimDuration d) { return static_cast<double>(d.count()) / 1000.0; };
  return json{{"status_local", ms(status_local)},
              {"status_remote", ms(status_remote)},
              {"config_full_local", ms(config_full_local)},
              {"config_full_remote", ms(config_full_remote)},
              {"pr_local", ms(pr_local)},
              {"pr_remote", ms(pr_remote)},
              {"gcs_access", ms(gcs_access)},
              {"ucs_access_by_count",
               {{"1", ms(ucs_access_1)}, {"2", ms(ucs_access_2)}, {"4", ms(ucs_access_4)}}}};
}

}  // namespace rc3e
