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

#ifndef MODELGATE_ROLLOUT_H_
#define MODELGATE_ROLLOUT_H_

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelgate/call_log.h"
#include "modelgate/policy.h"
#include "modelgate/registry.h"

namespace modelgate {

enum class NotifyOutcome {
  kStarted,   // rollout began in shadow
  kQueued,    // another rollout is active; FIFO
  kDeferred,  // no champion yet
  kCutover,   // staging disabled, the version replaced the champion
};

std::string_view NotifyOutcomeName(NotifyOutcome outcome);

// Owns the per-service rollout state and applies EvaluateTransition's verdicts
// to the registry. One active challenger per service; later notifications
// queue in arrival order.
class RolloutManager {
 public:
  RolloutManager(Registry& registry, CallLog& log, Clock clock, PolicyConfig policy = {});
  RolloutManager(const RolloutManager&) = delete;
  RolloutManager& operator=(const RolloutManager&) = delete;

  PolicyConfig policy() const;
  void SetPolicy(const PolicyConfig& policy);  // throws kInvalidConfig

  std::optional<RolloutState> Active(std::string_view service) const;
  std::vector<ModelId> Queued(std::string_view service) const;

  // Rebuilds rollout state from the registry after a restart: live
  // challengers resume with zeroed counters, registered versions queue.
  void Recover();

  // Called after a version is registered.
  NotifyOutcome OnRegistered(const ModelRecord& record);

  // Throws kRolloutInProgress or kNoChampion.
  RolloutState Start(const ModelId& challenger);

  // Makes a registered version the first champion of its service, then
  // starts any deferred rollout.
  void Bootstrap(const ModelId& id, const std::string& cause);

  void OnRequest(std::string_view service);
  void OnShadowCompared(const ModelId& model, bool agreed);
  void OnFeedback(const ModelId& served_by, Verdict verdict);

  // Evaluates the active rollout and applies the verdict.
  Transition Evaluate(std::string_view service);

  // Operator actions along the same edge set. Promote bootstraps the oldest
  // deferred version when the service has no champion. Both throw
  // kIllegalTransition when there is nothing to act on.
  Transition Promote(std::string_view service, const std::string& cause);
  void Rollback(std::string_view service, const std::string& cause);

 private:
  struct Tally {
    uint64_t compared = 0;
    uint64_t agreed = 0;
    uint64_t challenger_feedback = 0;
    uint64_t challenger_good = 0;
    uint64_t champion_feedback = 0;
    uint64_t champion_good = 0;
  };
  struct ServiceState {
    std::optional<RolloutState> active;
    Tally tally;
    std::deque<ModelId> queue;
  };

  RolloutState StartLocked(const ModelId& challenger);
  void ApplyLocked(ServiceState& state, Transition t, const std::string& cause);
  void StartNextLocked(const std::string& service);
  void RefreshMetricsLocked(ServiceState& state);
  void AuditThresholdLocked(const RolloutState& r, const std::string& cause);
  std::string DescribeLocked(const RolloutState& r, Transition t) const;

  Registry& registry_;
  CallLog& log_;
  Clock clock_;
  mutable std::mutex mu_;
  PolicyConfig policy_;
  std::map<std::string, ServiceState, std::less<>> services_;
};

}  // namespace modelgate

#endif  // MODELGATE_ROLLOUT_H_
