// Copyright 2026 The Modelgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modelgate/registry.h"

#include <mutex>

#include "json_codec.h"
#include "modelgate/error.h"

namespace modelgate {

namespace {

constexpr Stage kAllStages[] = {Stage::kRegistered, Stage::kShadow,     Stage::kCanary,
                                Stage::kThresholded, Stage::kFull,      Stage::kFallback,
                                Stage::kRetired};

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kRegistered: return "registered";
    case Stage::kShadow: return "shadow";
    case Stage::kCanary: return "canary";
    case Stage::kThresholded: return "thresholded";
    case Stage::kFull: return "full";
    case Stage::kFallback: return "fallback";
    case Stage::kRetired: return "retired";
  }
  return "unknown";
}

Stage ParseStage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  throw Error(ErrorCode::kSchemaError, "unknown stage '" + std::string(name) + "'");
}

bool IsLegalTransition(Stage from, Stage to, const TransitionContext& ctx) {
  if (from == to) return false;
  if (to == Stage::kRetired) return from != Stage::kRetired;
  switch (from) {
    case Stage::kRegistered:
      if (to == Stage::kShadow) return true;
      if (to == Stage::kFull) return !ctx.has_champion || !ctx.require_staging;
      return false;
    case Stage::kShadow:
      if (to == Stage::kCanary) return true;
      return to == Stage::kFull && !ctx.require_staging;
    case Stage::kCanary:
      if (to == Stage::kThresholded) return true;
      return to == Stage::kFull && !ctx.require_staging;
    case Stage::kThresholded:
      return to == Stage::kFull;
    case Stage::kFull:
      return to == Stage::kFallback;
    case Stage::kFallback:
    case Stage::kRetired:
      return false;
  }
  return false;
}

Registry::Registry(Clock clock) : clock_(std::move(clock)) {}

void Registry::SetAuditSink(StageAuditSink* sink) {
  std::unique_lock lock(mu_);
  audit_ = sink;
}

void Registry::AttachEventLog(const std::filesystem::path& path) {
  std::unique_lock lock(mu_);
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = json::Parse(line);
      std::string event = json::RequireString(j, "event");
      Timestamp at = ParseTimestamp(json::RequireString(j, "at"));
      if (event == "register") {
        RegisterLocked(json::NotificationFromJson(json::Require(j, "notification")),
                       json::RequireString(j, "deployment_id"), at);
      } else if (event == "stage") {
        ModelId id = ModelId::Parse(json::RequireString(j, "id"));
        ApplyChangeLocked(MutableLocked(id), ParseStage(json::RequireString(j, "to")),
                          json::RequireString(j, "cause"), at, /*replaying=*/true);
      } else {
        throw Error(ErrorCode::kStorageFailure, "unknown registry event '" + event + "'");
      }
    }
  }
  event_log_.open(path, std::ios::app);
  if (!event_log_) {
    throw Error(ErrorCode::kStorageFailure, "cannot open " + path.string());
  }
}

void Registry::AppendEvent(const std::string& line) {
  if (!event_log_.is_open()) return;
  event_log_ << line << '\n';
  event_log_.flush();
  if (!event_log_) throw Error(ErrorCode::kStorageFailure, "registry event log write failed");
}

ModelRecord Registry::Register(const VersionNotification& n,
                               const RegistrationOptions& options) {
  if (n.based_on) {
    if (n.based_on->service != n.model_id.service ||
        n.based_on->version >= n.model_id.version) {
      throw Error(ErrorCode::kLineageViolation,
                  n.model_id.ToString() + " cannot be based on " + n.based_on->ToString());
    }
  }
  Validate(n);

  std::unique_lock lock(mu_);
  if (records_.contains(n.model_id)) {
    throw Error(ErrorCode::kDuplicateVersion, n.model_id.ToString() + " already registered");
  }
  if (n.based_on && !records_.contains(*n.based_on)) {
    throw Error(ErrorCode::kLineageViolation,
                "based_on " + n.based_on->ToString() + " is not registered");
  }
  std::string deployment_id;
  if (options.deployment_id) {
    deployment_id = *options.deployment_id;
  } else {
    uint64_t next = deployments_per_service_[n.model_id.service] + 1;
    deployment_id = "depl-id:" + n.model_id.service + "-" + std::to_string(next);
  }
  Timestamp at = clock_();
  ModelRecord record = RegisterLocked(n, deployment_id, at);

  json::Json event = json::Json::object();
  event["event"] = "register";
  event["at"] = FormatTimestamp(at);
  event["deployment_id"] = deployment_id;
  event["notification"] = json::ToJson(n);
  AppendEvent(json::Dump(event));
  return record;
}

ModelRecord Registry::RegisterLocked(const VersionNotification& n,
                                     const std::string& deployment_id, Timestamp at) {
  ModelRecord record;
  record.id = n.model_id;
  record.endpoint = n.endpoint;
  record.based_on = n.based_on;
  record.related_to = n.related_to;
  record.stage = Stage::kRegistered;
  record.registered_at = at;
  record.deployment_id = deployment_id;
  record.test_id = n.test_id;
  record.signed_off = n.signed_off;
  ++deployments_per_service_[n.model_id.service];
  auto [it, inserted] = records_.emplace(record.id, record);
  if (!inserted) {
    throw Error(ErrorCode::kDuplicateVersion, n.model_id.ToString() + " already registered");
  }
  return record;
}

const ModelRecord* Registry::FindLocked(const ModelId& id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

ModelRecord& Registry::MutableLocked(const ModelId& id) {
  auto it = records_.find(id);
  if (it == records_.end()) {
    throw Error(ErrorCode::kUnknownModel, id.ToString() + " is not registered");
  }
  return it->second;
}

const ModelRecord* Registry::FindStageLocked(std::string_view service, Stage stage) const {
  const ModelRecord* found = nullptr;
  for (const auto& [id, record] : records_) {
    if (id.service == service && record.stage == stage) found = &record;
  }
  return found;
}

ActiveChain Registry::ResolveChain(std::string_view service) const {
  std::shared_lock lock(mu_);
  const ModelRecord* champion = FindStageLocked(service, Stage::kFull);
  if (champion == nullptr) {
    throw Error(ErrorCode::kNoChampion, "service '" + std::string(service) + "' has no full model");
  }
  ActiveChain chain;
  chain.service = std::string(service);
  chain.champion = champion->id;
  for (const auto& [id, record] : records_) {
    if (id.service != service) continue;
    switch (record.stage) {
      case Stage::kCanary:
      case Stage::kThresholded:
        chain.challenger = id;
        chain.challenger_stage = record.stage;
        break;
      case Stage::kShadow:
        chain.shadows.push_back(id);
        break;
      case Stage::kFallback:
        chain.fallback = id;
        break;
      default:
        break;
    }
  }
  if (!chain.challenger && !chain.shadows.empty()) {
    chain.challenger = chain.shadows.back();
    chain.challenger_stage = Stage::kShadow;
  }
  return chain;
}

ModelRecord Registry::SetStage(const ModelId& id, Stage to, const std::string& cause,
                               bool require_staging) {
  std::unique_lock lock(mu_);
  ModelRecord& record = MutableLocked(id);
  const ModelRecord* champion = FindStageLocked(id.service, Stage::kFull);
  TransitionContext ctx{.has_champion = champion != nullptr,
                        .require_staging = require_staging};
  if (!IsLegalTransition(record.stage, to, ctx)) {
    throw Error(ErrorCode::kIllegalTransition,
                id.ToString() + ": " + std::string(StageName(record.stage)) + " -> " +
                    std::string(StageName(to)) + " is not a legal transition");
  }
  if (to == Stage::kCanary || to == Stage::kThresholded) {
    for (const auto& [other_id, other] : records_) {
      if (other_id.service == id.service && other_id != id &&
          (other.stage == Stage::kCanary || other.stage == Stage::kThresholded)) {
        throw Error(ErrorCode::kIllegalTransition,
                    other_id.ToString() + " already holds the live challenger slot");
      }
    }
  }
  Timestamp at = clock_();
  if (to == Stage::kFull && champion != nullptr && champion->id != id) {
    if (const ModelRecord* fallback = FindStageLocked(id.service, Stage::kFallback)) {
      ApplyChangeLocked(MutableLocked(fallback->id), Stage::kRetired,
                        "replaced as fallback by " + champion->id.ToString(), at, false);
    }
    ApplyChangeLocked(MutableLocked(champion->id), Stage::kFallback,
                      "superseded by " + id.ToString(), at, false);
  }
  ApplyChangeLocked(record, to, cause, at, false);
  return record;
}

void Registry::ApplyChangeLocked(ModelRecord& record, Stage to, const std::string& cause,
                                 Timestamp at, bool replaying) {
  StageChange change{record.id, record.stage, to, cause, at};
  if (record.stage == Stage::kRegistered && !record.deployed_at) record.deployed_at = at;
  record.stage = to;
  record.history.push_back(change);
  ++stage_changes_;
  if (replaying) return;

  json::Json event = json::Json::object();
  event["event"] = "stage";
  event["at"] = FormatTimestamp(at);
  event["id"] = change.id.ToString();
  event["from"] = std::string(StageName(change.from));
  event["to"] = std::string(StageName(change.to));
  event["cause"] = cause;
  AppendEvent(json::Dump(event));
  if (audit_ != nullptr) audit_->RecordStageChange(change);
}

ModelRecord Registry::Get(const ModelId& id) const {
  std::shared_lock lock(mu_);
  const ModelRecord* record = FindLocked(id);
  if (record == nullptr) {
    throw Error(ErrorCode::kUnknownModel, id.ToString() + " is not registered");
  }
  return *record;
}

std::optional<ModelRecord> Registry::Find(const ModelId& id) const {
  std::shared_lock lock(mu_);
  const ModelRecord* record = FindLocked(id);
  if (record == nullptr) return std::nullopt;
  return *record;
}

bool Registry::HasChampion(std::string_view service) const {
  std::shared_lock lock(mu_);
  return FindStageLocked(service, Stage::kFull) != nullptr;
}

std::vector<ModelRecord> Registry::List() const {
  std::shared_lock lock(mu_);
  std::vector<ModelRecord> out;
  for (const auto& [id, record] : records_) out.push_back(record);
  return out;
}

std::vector<ModelRecord> Registry::List(std::string_view service) const {
  std::shared_lock lock(mu_);
  std::vector<ModelRecord> out;
  for (const auto& [id, record] : records_) {
    if (id.service == service) out.push_back(record);
  }
  return out;
}

size_t Registry::stage_change_count() const {
  std::shared_lock lock(mu_);
  return stage_changes_;
}

}  // namespace modelgate
