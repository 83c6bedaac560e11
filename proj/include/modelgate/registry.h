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

#ifndef MODELGATE_REGISTRY_H_
#define MODELGATE_REGISTRY_H_

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "modelgate/protocol.h"
#include "modelgate/time.h"

namespace modelgate {

enum class Stage { kRegistered, kShadow, kCanary, kThresholded, kFull, kFallback, kRetired };

std::string_view StageName(Stage stage);
Stage ParseStage(std::string_view name);  // throws kSchemaError

struct StageChange {
  ModelId id;
  Stage from = Stage::kRegistered;
  Stage to = Stage::kRegistered;
  std::string cause;
  Timestamp at{};

  friend bool operator==(const StageChange&, const StageChange&) = default;
};

struct ModelRecord {
  ModelId id;
  std::string endpoint;
  std::optional<ModelId> based_on;
  std::string related_to;
  Stage stage = Stage::kRegistered;
  Timestamp registered_at{};
  // First time the version received live traffic (left `registered`).
  std::optional<Timestamp> deployed_at;
  std::string deployment_id;
  std::optional<std::string> test_id;
  std::optional<std::string> signed_off;
  std::vector<StageChange> history;

  friend bool operator==(const ModelRecord&, const ModelRecord&) = default;
};

// Snapshot of which versions of a service take part in routing.
struct ActiveChain {
  std::string service;
  ModelId champion;
  // The version in canary/thresholded, or else the newest shadow.
  std::optional<ModelId> challenger;
  std::optional<Stage> challenger_stage;
  std::optional<ModelId> fallback;
  std::vector<ModelId> shadows;
};

struct TransitionContext {
  bool has_champion = true;
  // When false, a version may go straight to `full` (direct cutover).
  bool require_staging = true;
};

// The rollout state machine edge set, plus demotion of a superseded champion
// (full -> fallback) and rollback (any live stage -> retired).
bool IsLegalTransition(Stage from, Stage to, const TransitionContext& ctx);

class StageAuditSink {
 public:
  virtual ~StageAuditSink() = default;
  virtual void RecordStageChange(const StageChange& change) = 0;
};

struct RegistrationOptions {
  // Generated ("depl-id:<service>-<n>") when absent.
  std::optional<std::string> deployment_id;
};

// Every known model version per service. Writes are serialized; readers get
// consistent snapshots. Optionally persisted as an append-only event log
// that is replayed on attach.
class Registry {
 public:
  explicit Registry(Clock clock = SystemClock());
  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;

  void SetAuditSink(StageAuditSink* sink);

  // Replays `path` if it exists, then appends every later mutation to it.
  void AttachEventLog(const std::filesystem::path& path);

  // Stores a record in stage `registered`. Throws kDuplicateVersion or
  // kLineageViolation.
  ModelRecord Register(const VersionNotification& notification,
                       const RegistrationOptions& options = {});

  // Throws kNoChampion.
  ActiveChain ResolveChain(std::string_view service) const;

  // Moves `id` to `to`. Promotion to `full` demotes the previous champion to
  // `fallback` and retires the previous fallback; each of those is its own
  // audited stage change. Throws kUnknownModel or kIllegalTransition.
  ModelRecord SetStage(const ModelId& id, Stage to, const std::string& cause,
                       bool require_staging = true);

  ModelRecord Get(const ModelId& id) const;  // throws kUnknownModel
  std::optional<ModelRecord> Find(const ModelId& id) const;
  bool HasChampion(std::string_view service) const;
  std::vector<ModelRecord> List() const;
  std::vector<ModelRecord> List(std::string_view service) const;
  size_t stage_change_count() const;

 private:
  ModelRecord& MutableLocked(const ModelId& id);
  const ModelRecord* FindLocked(const ModelId& id) const;
  const ModelRecord* FindStageLocked(std::string_view service, Stage stage) const;
  ModelRecord RegisterLocked(const VersionNotification& n, const std::string& deployment_id,
                             Timestamp at);
  void ApplyChangeLocked(ModelRecord& record, Stage to, const std::string& cause,
                         Timestamp at, bool replaying);
  void AppendEvent(const std::string& line);

  Clock clock_;
  mutable std::shared_mutex mu_;
  std::map<ModelId, ModelRecord> records_;
  std::map<std::string, uint64_t, std::less<>> deployments_per_service_;
  size_t stage_changes_ = 0;
  StageAuditSink* audit_ = nullptr;
  std::ofstream event_log_;
};

}  // namespace modelgate

#endif  // MODELGATE_REGISTRY_H_
