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

#ifndef MODELGATE_HARNESS_SCENARIO_H_
#define MODELGATE_HARNESS_SCENARIO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelgate/analytics.h"
#include "modelgate/error.h"
#include "modelgate/factbox.h"
#include "modelgate/harness/stub_model.h"
#include "modelgate/harness/traffic.h"
#include "modelgate/modelgate.h"
#include "modelgate/policy.h"

namespace modelgate::harness {

struct StubSpec {
  StubModelConfig model;
  std::optional<ModelId> based_on;
  std::string related_to;
  std::optional<std::string> test_id;
  std::optional<std::string> signed_off;
  std::optional<std::string> deployment_id;
};

enum class ScriptAction { kChampion, kNotify, kPromote, kRollback, kSetPolicy, kResolveEscalations };

// Runs after `at` requests have been served (0: before the first one).
struct ScriptEvent {
  uint64_t at = 0;
  ScriptAction action = ScriptAction::kNotify;
  std::optional<ModelId> model;  // champion / notify
  std::string policy_patch;      // set_policy: JSON object merged into the policy
  std::string cause;
};

enum class RunMode {
  kStaged,         // the policy state machine gates every new version
  kDirectCutover,  // baseline: a notified version takes all traffic at once
};

enum class WorkerMode {
  kNone,       // escalations wait for a resolve_escalations script event
  kImmediate,  // a worker answers each escalation with the true label at once
};

struct Scenario {
  std::string name;
  uint64_t seed = 1;
  std::string service;
  RunMode mode = RunMode::kStaged;
  TruthRule truth;  // shared by every stub and by simulated feedback
  std::vector<StubSpec> stubs;
  TrafficConfig traffic;
  PolicyConfig policy;
  double feedback_probability = 0.5;
  size_t cluster_k = 4;
  uint64_t cluster_fit_after = 0;
  uint64_t cluster_refit_every = 10000;
  uint64_t window = 1000;
  WorkerMode worker = WorkerMode::kNone;
  std::vector<ScriptEvent> script;
};

// Throws kConfigError.
Scenario ParseScenario(std::string_view json_text);
Scenario LoadScenario(const std::filesystem::path& path);

struct WindowReport {
  uint64_t index = 0;  // 1-based
  uint64_t from = 0;   // request indices, inclusive
  uint64_t to = 0;
  std::map<ModelId, uint64_t> served;
  std::map<ModelId, RateStats> good;
  std::optional<DriftReport> drift;  // against the first window
  std::map<ModelId, Stage> stages;   // at the end of the window
};

struct TimelineEvent {
  uint64_t request_index = 0;  // requests served when the change happened
  AuditKind kind = AuditKind::kStageChange;
  std::string subject;
  std::string before;  // JSON text
  std::string after;   // JSON text
  std::string cause;
};

struct ScenarioReport {
  std::string name;
  uint64_t seed = 0;
  RunMode mode = RunMode::kStaged;
  uint64_t total = 0;
  // Per model, per invocation tag (4a/4b/4c/4d).
  std::map<ModelId, std::map<std::string, uint64_t>> served;
  uint64_t errors = 0;  // requests that returned no response
  uint64_t feedback_joined = 0;
  uint64_t escalations = 0;
  uint64_t escalations_resolved = 0;
  uint64_t escalations_pending = 0;
  std::vector<WindowReport> windows;
  std::vector<TimelineEvent> timeline;
  std::map<ModelId, FactBox> fact_boxes;

  uint64_t ServedBy(const ModelId& model) const;
  uint64_t ServedTotal() const;  // sum over models and tags, excluding errors
  double Share(const ModelId& model) const;

  std::string ToJson() const;
};

// Thrown when the run stops early; carries the report up to that point.
class ScenarioAborted : public Error {
 public:
  ScenarioAborted(const std::string& detail, std::string partial_report)
      : Error(ErrorCode::kScenarioAborted, detail), partial_report_(std::move(partial_report)) {}
  const std::string& partial_report() const { return partial_report_; }

 private:
  std::string partial_report_;
};

struct RunOptions {
  std::optional<uint64_t> seed;          // overrides the document's seed
  std::optional<RunMode> mode;           // overrides the document's mode
  std::filesystem::path log_dir;         // persist registry and call log here
};

// One in-process deployment driven by a scenario. Single-threaded and
// deterministic: identical documents and options give identical reports.
class ScenarioRunner {
 public:
  ScenarioRunner(Scenario scenario, RunOptions options = {});
  ~ScenarioRunner();

  ScenarioReport Run();

  Modelgate& gate() { return *gate_; }
  const Scenario& scenario() const { return scenario_; }

 private:
  void ApplyEvent(const ScriptEvent& event);
  void ResolvePending();
  void CollectTimeline(uint64_t request_index);
  void CloseWindow(uint64_t from, uint64_t to);
  ScenarioReport Finish();

  Scenario scenario_;
  RunOptions options_;
  uint64_t seed_ = 0;
  uint64_t base_seq_ = 0;  // log entries present before the run
  bool ran_ = false;
  Timestamp now_{};
  std::unique_ptr<Modelgate> gate_;
  std::map<ModelId, StubSpec> stubs_;
  std::map<ModelId, std::shared_ptr<StubModel>> models_;
  ScenarioReport report_;
  size_t audit_seen_ = 0;
  std::vector<FeatureVector> first_window_;
};

// Convenience for bindings and tools: document in, report JSON out.
std::string RunScenarioJson(std::string_view scenario_json,
                            std::optional<uint64_t> seed = std::nullopt);

std::string_view RunModeName(RunMode mode);

}  // namespace modelgate::harness

#endif  // MODELGATE_HARNESS_SCENARIO_H_
