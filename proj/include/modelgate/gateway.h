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

#ifndef MODELGATE_GATEWAY_H_
#define MODELGATE_GATEWAY_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "modelgate/backend.h"
#include "modelgate/call_log.h"
#include "modelgate/clustering.h"
#include "modelgate/escalation.h"
#include "modelgate/registry.h"
#include "modelgate/rollout.h"

namespace modelgate {

enum class ShadowMode {
  kInline,  // run after the log append, before returning (deterministic)
  kAsync,   // worker threads with a bounded in-flight budget
};

struct GatewayOptions {
  std::string service;
  std::chrono::milliseconds deadline = kDefaultDeadline;
  ShadowMode shadow_mode = ShadowMode::kAsync;
  size_t shadow_threads = 2;
  size_t shadow_budget = 256;

  // Automatic input clustering over this service's log. fit_after == 0
  // disables it; PublishClusters can still install a model.
  size_t cluster_k = 8;
  uint64_t cluster_fit_after = 0;
  uint64_t cluster_refit_every = 10000;
  uint64_t cluster_seed = 1;
};

struct ScoreOutcome {
  ScoreResponse response;
  ServeRule rule = ServeRule::kChampion;
  uint64_t seq = 0;  // log sequence number, used as the decision id
};

struct FeedbackAck {
  JoinResult join = JoinResult::kJoined;
  bool forwarded = false;
};

struct NotifyAck {
  ModelRecord record;
  NotifyOutcome outcome = NotifyOutcome::kStarted;
};

// The data plane: score, feedback and notify with the model-microservice
// contract. Every score call appends exactly one log entry, including
// failed ones.
class Gateway {
 public:
  Gateway(Registry& registry, CallLog& log, RolloutManager& rollouts,
          EscalationQueue& escalations, BackendPool& backends, Clock clock,
          GatewayOptions options);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  const GatewayOptions& options() const { return options_; }

  // Throws kInvariantViolation, kNoChampion or kAllBackendsFailed.
  ScoreOutcome HandleScore(const ScoreRequest& request);
  ScoreResponse Score(const ScoreRequest& request) { return HandleScore(request).response; }

  // Throws kInvariantViolation or kUnknownRequest. A failed forward to the
  // backend is reported in the ack, not thrown.
  FeedbackAck HandleFeedback(const FeedbackRecord& feedback);

  // Throws kInvariantViolation, kDuplicateVersion or kLineageViolation.
  NotifyAck HandleNotify(const VersionNotification& notification,
                         const RegistrationOptions& options = {});

  // Blocks until every dispatched shadow call has been logged.
  void Flush();

  void PublishClusters(ClusterModel model);
  std::shared_ptr<const ClusterModel> clusters() const;

  uint64_t shadow_dropped() const;
  uint64_t forward_failures() const;

 private:
  struct ShadowTask {
    ScoreRequest request;
    ModelId target;
    std::optional<std::string> served_label;
  };

  BackendResult Invoke(const ModelId& id, const ScoreRequest& request);
  void DispatchShadow(ShadowTask task);
  void RunShadow(const ShadowTask& task);
  void ShadowWorker();
  void MaybeFitClusters();

  Registry& registry_;
  CallLog& log_;
  RolloutManager& rollouts_;
  EscalationQueue& escalations_;
  BackendPool& backends_;
  Clock clock_;
  GatewayOptions options_;

  mutable std::mutex clusters_mu_;
  std::shared_ptr<const ClusterModel> clusters_;
  std::mutex fit_mu_;
  uint64_t served_since_fit_ = 0;
  uint64_t scored_ = 0;

  std::mutex shadow_mu_;
  std::condition_variable shadow_cv_;
  std::condition_variable idle_cv_;
  std::deque<ShadowTask> shadow_queue_;
  size_t shadow_in_flight_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> shadow_threads_;

  mutable std::mutex counters_mu_;
  uint64_t shadow_dropped_ = 0;
  uint64_t forward_failures_ = 0;
};

}  // namespace modelgate

#endif  // MODELGATE_GATEWAY_H_
