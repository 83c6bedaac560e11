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

#include "modelgate/gateway.h"

#include <algorithm>

#include "modelgate/analytics.h"
#include "modelgate/error.h"
#include "modelgate/policy.h"

namespace modelgate {

Gateway::Gateway(Registry& registry, CallLog& log, RolloutManager& rollouts,
                 EscalationQueue& escalations, BackendPool& backends, Clock clock,
                 GatewayOptions options)
    : registry_(registry),
      log_(log),
      rollouts_(rollouts),
      escalations_(escalations),
      backends_(backends),
      clock_(std::move(clock)),
      options_(std::move(options)) {
  if (options_.service.empty()) throw Error(ErrorCode::kInvalidConfig, "gateway service is empty");
  if (options_.shadow_mode == ShadowMode::kAsync) {
    size_t n = std::max<size_t>(1, options_.shadow_threads);
    for (size_t i = 0; i < n; ++i) shadow_threads_.emplace_back([this] { ShadowWorker(); });
  }
}

Gateway::~Gateway() {
  Flush();
  {
    std::lock_guard lock(shadow_mu_);
    stopping_ = true;
  }
  shadow_cv_.notify_all();
  for (auto& t : shadow_threads_) t.join();
}

BackendResult Gateway::Invoke(const ModelId& id, const ScoreRequest& request) {
  auto record = registry_.Find(id);
  if (!record) return BackendResult::Failure("UNKNOWN_MODEL", id.ToString(), 0.0);
  return InvokeBackend(backends_.Resolve(record->endpoint).get(), request, options_.deadline);
}

ScoreOutcome Gateway::HandleScore(const ScoreRequest& request) {
  Validate(request);
  LogEntry entry;
  entry.service = options_.service;
  entry.request_id = request.request_id;
  entry.timestamp = request.timestamp;
  entry.features = request.features;

  ActiveChain chain;
  try {
    chain = registry_.ResolveChain(options_.service);
  } catch (const Error& e) {
    entry.decision_reason = "no champion";
    entry.error = std::string(ErrorCodeName(e.code()));
    log_.Append(std::move(entry));
    throw;
  }

  PolicyConfig policy = rollouts_.policy();
  std::optional<RolloutState> rollout = rollouts_.Active(options_.service);
  std::shared_ptr<const ClusterModel> clusters = this->clusters();
  std::optional<ClusterAssignment> assignment;
  if (clusters) {
    try {
      assignment = Assign(request.features, *clusters, policy.cluster_gate.anomaly_factor);
    } catch (const Error&) {
      // Schema differs from the fitted model; treat as unclustered.
    }
  }
  bool anomalous = assignment && assignment->anomalous;
  RoutingDecision decision = Decide(request, chain, rollout ? &*rollout : nullptr,
                                    clusters.get(), assignment, anomalous, policy);
  entry.decision_reason = decision.reason;
  entry.threshold = decision.threshold;
  entry.shadow_targets = decision.shadow_targets;
  entry.cluster = assignment;

  auto exception_begin =
      std::find_if(decision.serve_path.begin(), decision.serve_path.end(),
                   [](const RouteAttempt& a) { return IsExceptionRule(a.rule); });

  std::optional<size_t> candidate;  // index into entry.invocations
  for (auto it = decision.serve_path.begin(); it != exception_begin; ++it) {
    BackendResult r = Invoke(*it->target, request);
    entry.invocations.push_back({*it->target, it->rule, r});
    if (!r.ok()) continue;
    if (it->rule == ServeRule::kChallengerThreshold &&
        ApplyThreshold(*r.response, decision.threshold.value_or(1.0)) ==
            ThresholdOutcome::kUseChampion) {
      continue;
    }
    candidate = entry.invocations.size() - 1;
    break;
  }

  double min_conf = decision.min_confidence;
  auto confident = [&](size_t i) {
    return entry.invocations[i].result.response->TopConfidence() >= min_conf;
  };
  bool triggered = !candidate || (min_conf > 0.0 && !confident(*candidate)) || anomalous;

  std::optional<size_t> chosen;
  std::optional<size_t> provisional;  // ok fallback answer below the bar
  bool escalate = false;
  if (triggered) {
    for (auto it = exception_begin; it != decision.serve_path.end(); ++it) {
      if (it->rule == ServeRule::kEscalate) {
        escalate = true;
        break;
      }
      BackendResult r = Invoke(*it->target, request);
      entry.invocations.push_back({*it->target, it->rule, r});
      if (!r.ok()) continue;
      size_t i = entry.invocations.size() - 1;
      if (confident(i)) {
        chosen = i;
        break;
      }
      if (!provisional) provisional = i;
    }
  }
  if (!chosen && !escalate) chosen = candidate ? candidate : provisional;

  double latency = 0.0;
  for (const auto& inv : entry.invocations) latency += inv.result.latency_ms;

  ScoreOutcome out;
  ScoreResponse& resp = out.response;
  if (escalate) {
    EscalationContext context;
    context.reason = decision.reason;
    for (const auto& inv : entry.invocations) {
      if (inv.result.ok()) {
        context.candidates.push_back({inv.model, inv.rule, inv.result.response->predictions});
      }
    }
    if (!candidate && !provisional) context.reason += "; no backend answered";
    std::string esc_id = escalations_.Enqueue(request, std::move(context));
    resp.request_id = request.request_id;
    resp.status = ResponseStatus::kEscalated;
    resp.escalation_id = esc_id;
    if (provisional) {
      resp.served_by = entry.invocations[*provisional].model;
      resp.predictions = entry.invocations[*provisional].result.response->predictions;
    } else if (candidate) {
      resp.served_by = entry.invocations[*candidate].model;
    } else {
      resp.served_by = entry.invocations.empty() ? chain.champion
                                                 : entry.invocations.back().model;
    }
    out.rule = ServeRule::kEscalate;
  } else if (chosen) {
    const Invocation& inv = entry.invocations[*chosen];
    resp = *inv.result.response;
    resp.served_by = inv.model;
    resp.request_id = request.request_id;
    resp.status = ResponseStatus::kOk;
    resp.escalation_id.reset();
    out.rule = inv.rule;
  } else {
    entry.error = std::string(ErrorCodeName(ErrorCode::kAllBackendsFailed));
    log_.Append(std::move(entry));
    rollouts_.OnRequest(options_.service);
    throw Error(ErrorCode::kAllBackendsFailed,
                "every attempt for " + request.request_id + " failed");
  }
  resp.latency_ms = latency;
  entry.served = resp;
  entry.served_rule = out.rule;

  std::optional<std::string> served_label;
  if (!resp.predictions.empty()) served_label = resp.predictions.front().result;
  std::vector<ModelId> shadows = decision.shadow_targets;
  out.seq = log_.Append(std::move(entry));
  rollouts_.OnRequest(options_.service);

  for (const auto& target : shadows) DispatchShadow({request, target, served_label});
  MaybeFitClusters();
  rollouts_.Evaluate(options_.service);
  return out;
}

void Gateway::DispatchShadow(ShadowTask task) {
  if (options_.shadow_mode == ShadowMode::kInline) {
    RunShadow(task);
    return;
  }
  {
    std::lock_guard lock(shadow_mu_);
    if (shadow_in_flight_ < options_.shadow_budget) {
      ++shadow_in_flight_;
      shadow_queue_.push_back(std::move(task));
      shadow_cv_.notify_one();
      return;
    }
  }
  {
    std::lock_guard lock(counters_mu_);
    ++shadow_dropped_;
  }
  ShadowOutcome dropped{task.target,
                        BackendResult::Failure("SHADOW_BUDGET", "in-flight budget exhausted", 0.0),
                        false};
  log_.RecordShadow(task.request.request_id, dropped);
}

void Gateway::RunShadow(const ShadowTask& task) {
  BackendResult r = Invoke(task.target, task.request);
  ShadowOutcome outcome{task.target, r, false};
  bool compared = r.ok() && task.served_label.has_value();
  if (compared) outcome.disagrees = r.response->predictions.front().result != *task.served_label;
  try {
    log_.RecordShadow(task.request.request_id, outcome);
  } catch (const Error&) {
    return;  // the entry is gone (log replaced); nothing to annotate
  }
  if (compared) rollouts_.OnShadowCompared(task.target, !outcome.disagrees);
}

void Gateway::ShadowWorker() {
  for (;;) {
    ShadowTask task;
    {
      std::unique_lock lock(shadow_mu_);
      shadow_cv_.wait(lock, [this] { return stopping_ || !shadow_queue_.empty(); });
      if (shadow_queue_.empty()) return;
      task = std::move(shadow_queue_.front());
      shadow_queue_.pop_front();
    }
    RunShadow(task);
    {
      std::lock_guard lock(shadow_mu_);
      --shadow_in_flight_;
    }
    idle_cv_.notify_all();
  }
}

void Gateway::Flush() {
  std::unique_lock lock(shadow_mu_);
  idle_cv_.wait(lock, [this] { return shadow_in_flight_ == 0; });
}

FeedbackAck Gateway::HandleFeedback(const FeedbackRecord& feedback) {
  Validate(feedback);
  FeedbackAck ack;
  ack.join = log_.JoinFeedback(feedback);  // throws kUnknownRequest
  if (ack.join == JoinResult::kDuplicate) return ack;
  std::optional<LogEntry> entry = log_.FindByRequest(feedback.request_id);
  if (!entry || !entry->served || entry->served->predictions.empty()) return ack;
  const ModelId served_by = entry->served->served_by;
  if (auto record = registry_.Find(served_by)) {
    try {
      auto backend = backends_.Resolve(record->endpoint);
      ack.forwarded = backend && backend->Feedback(feedback);
    } catch (const std::exception&) {
      ack.forwarded = false;
    }
  }
  if (!ack.forwarded) {
    std::lock_guard lock(counters_mu_);
    ++forward_failures_;
  }
  if (entry->served->status == ResponseStatus::kOk) {
    rollouts_.OnFeedback(served_by, feedback.verdict);
    rollouts_.Evaluate(served_by.service);
  }
  return ack;
}

NotifyAck Gateway::HandleNotify(const VersionNotification& notification,
                                const RegistrationOptions& options) {
  NotifyAck ack;
  ack.record = registry_.Register(notification, options);
  ack.outcome = rollouts_.OnRegistered(ack.record);
  ack.record = registry_.Get(ack.record.id);
  return ack;
}

void Gateway::PublishClusters(ClusterModel model) {
  auto snapshot = std::make_shared<const ClusterModel>(std::move(model));
  std::lock_guard lock(clusters_mu_);
  clusters_ = std::move(snapshot);
}

std::shared_ptr<const ClusterModel> Gateway::clusters() const {
  std::lock_guard lock(clusters_mu_);
  return clusters_;
}

void Gateway::MaybeFitClusters() {
  if (options_.cluster_fit_after == 0) return;
  std::lock_guard lock(fit_mu_);
  ++scored_;
  ++served_since_fit_;
  bool have = clusters() != nullptr;
  if (scored_ < options_.cluster_fit_after) return;
  if (have && served_since_fit_ < options_.cluster_refit_every) return;
  std::vector<LogEntry> window;
  for (auto& e : log_.Last(options_.cluster_fit_after)) {
    if (e.service == options_.service) window.push_back(std::move(e));
  }
  try {
    PublishClusters(FitClustersFromLog(window, options_.cluster_k, options_.cluster_seed,
                                       clock_(), rollouts_.policy().cluster_gate.anomaly_factor));
    served_since_fit_ = 0;
  } catch (const Error&) {
    // Too few distinct inputs so far; retry on the next request.
  }
}

uint64_t Gateway::shadow_dropped() const {
  std::lock_guard lock(counters_mu_);
  return shadow_dropped_;
}

uint64_t Gateway::forward_failures() const {
  std::lock_guard lock(counters_mu_);
  return forward_failures_;
}

}  // namespace modelgate
