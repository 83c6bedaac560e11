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

#include "modelgate/rollout.h"

#include <cstdio>

#include "json_codec.h"
#include "modelgate/error.h"

namespace modelgate {

namespace {

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string_view NotifyOutcomeName(NotifyOutcome outcome) {
  switch (outcome) {
    case NotifyOutcome::kStarted: return "started";
    case NotifyOutcome::kQueued: return "queued";
    case NotifyOutcome::kDeferred: return "deferred";
    case NotifyOutcome::kCutover: return "cutover";
  }
  return "unknown";
}

RolloutManager::RolloutManager(Registry& registry, CallLog& log, Clock clock,
                               PolicyConfig policy)
    : registry_(registry), log_(log), clock_(std::move(clock)), policy_(std::move(policy)) {
  policy_.Validate();
}

PolicyConfig RolloutManager::policy() const {
  std::lock_guard lock(mu_);
  return policy_;
}

void RolloutManager::SetPolicy(const PolicyConfig& policy) {
  policy.Validate();
  std::lock_guard lock(mu_);
  policy_ = policy;
  for (auto& [service, state] : services_) {
    if (state.active && state.active->threshold_index >= policy_.threshold_schedule.size()) {
      state.active->threshold_index = policy_.threshold_schedule.size() - 1;
    }
  }
}

std::optional<RolloutState> RolloutManager::Active(std::string_view service) const {
  std::lock_guard lock(mu_);
  auto it = services_.find(service);
  if (it == services_.end()) return std::nullopt;
  return it->second.active;
}

std::vector<ModelId> RolloutManager::Queued(std::string_view service) const {
  std::lock_guard lock(mu_);
  auto it = services_.find(service);
  if (it == services_.end()) return {};
  return {it->second.queue.begin(), it->second.queue.end()};
}

void RolloutManager::Recover() {
  std::lock_guard lock(mu_);
  for (const ModelRecord& record : registry_.List()) {
    const std::string& service = record.id.service;
    ServiceState& state = services_[service];
    switch (record.stage) {
      case Stage::kRegistered:
        state.queue.push_back(record.id);
        break;
      case Stage::kShadow:
      case Stage::kCanary:
      case Stage::kThresholded: {
        if (state.active) break;
        ActiveChain chain = registry_.ResolveChain(service);
        state.active = StartRollout(record.id, chain.champion, clock_());
        state.active->stage = record.stage;
        state.tally = {};
        break;
      }
      default:
        break;
    }
  }
}

NotifyOutcome RolloutManager::OnRegistered(const ModelRecord& record) {
  std::lock_guard lock(mu_);
  const std::string& service = record.id.service;
  if (!policy_.require_staging) {
    registry_.SetStage(record.id, Stage::kFull, "direct cutover", /*require_staging=*/false);
    return NotifyOutcome::kCutover;
  }
  ServiceState& state = services_[service];
  if (!registry_.HasChampion(service)) {
    state.queue.push_back(record.id);
    return NotifyOutcome::kDeferred;
  }
  if (state.active) {
    state.queue.push_back(record.id);
    return NotifyOutcome::kQueued;
  }
  StartLocked(record.id);
  return NotifyOutcome::kStarted;
}

RolloutState RolloutManager::Start(const ModelId& challenger) {
  std::lock_guard lock(mu_);
  return StartLocked(challenger);
}

RolloutState RolloutManager::StartLocked(const ModelId& challenger) {
  ServiceState& state = services_[challenger.service];
  if (state.active) {
    throw Error(ErrorCode::kRolloutInProgress,
                state.active->challenger.ToString() + " is already rolling out");
  }
  ActiveChain chain = registry_.ResolveChain(challenger.service);  // throws kNoChampion
  registry_.SetStage(challenger, Stage::kShadow, "rollout started");
  state.active = StartRollout(challenger, chain.champion, clock_());
  state.tally = {};
  return *state.active;
}

void RolloutManager::Bootstrap(const ModelId& id, const std::string& cause) {
  std::lock_guard lock(mu_);
  registry_.SetStage(id, Stage::kFull, cause);
  ServiceState& state = services_[id.service];
  std::erase(state.queue, id);
  StartNextLocked(id.service);
}

void RolloutManager::OnRequest(std::string_view service) {
  std::lock_guard lock(mu_);
  auto it = services_.find(service);
  if (it == services_.end() || !it->second.active) return;
  ++it->second.active->requests_in_stage;
}

void RolloutManager::OnShadowCompared(const ModelId& model, bool agreed) {
  std::lock_guard lock(mu_);
  auto it = services_.find(model.service);
  if (it == services_.end() || !it->second.active) return;
  ServiceState& state = it->second;
  if (state.active->challenger != model || state.active->stage != Stage::kShadow) return;
  ++state.tally.compared;
  if (agreed) ++state.tally.agreed;
  RefreshMetricsLocked(state);
}

void RolloutManager::OnFeedback(const ModelId& served_by, Verdict verdict) {
  std::lock_guard lock(mu_);
  auto it = services_.find(served_by.service);
  if (it == services_.end() || !it->second.active) return;
  ServiceState& state = it->second;
  const RolloutState& r = *state.active;
  if (r.stage != Stage::kCanary && r.stage != Stage::kThresholded) return;
  bool good = verdict == Verdict::kGood;
  if (served_by == r.challenger) {
    ++state.tally.challenger_feedback;
    if (good) ++state.tally.challenger_good;
  } else if (served_by == r.champion) {
    ++state.tally.champion_feedback;
    if (good) ++state.tally.champion_good;
  }
  RefreshMetricsLocked(state);
}

void RolloutManager::RefreshMetricsLocked(ServiceState& state) {
  RolloutMetrics& m = state.active->metrics;
  const Tally& t = state.tally;
  m.agreement.reset();
  if (t.compared > 0 && state.active->stage == Stage::kShadow) {
    m.agreement = static_cast<double>(t.agreed) / static_cast<double>(t.compared);
  }
  m.feedback_count = t.challenger_feedback;
  m.good_rate_challenger.reset();
  m.good_rate_champion.reset();
  if (t.challenger_feedback > 0) {
    m.good_rate_challenger =
        static_cast<double>(t.challenger_good) / static_cast<double>(t.challenger_feedback);
  }
  if (t.champion_feedback > 0) {
    m.good_rate_champion =
        static_cast<double>(t.champion_good) / static_cast<double>(t.champion_feedback);
  }
}

std::string RolloutManager::DescribeLocked(const RolloutState& r, Transition t) const {
  const auto& p = policy_.promotion;
  const auto& m = r.metrics;
  switch (t) {
    case Transition::kRollback:
      return "challenger good rate " + Fixed(m.good_rate_challenger.value_or(0)) + " < champion " +
             Fixed(m.good_rate_champion.value_or(0)) + " - " + Fixed(p.rollback_delta) + " after " +
             std::to_string(m.feedback_count) + " feedbacks";
    case Transition::kLowerThreshold:
      return "dwell of " + std::to_string(r.requests_in_stage) + " requests at tau " +
             Fixed(policy_.threshold_schedule[r.threshold_index]);
    case Transition::kPromote:
      switch (r.stage) {
        case Stage::kShadow:
          return "agreement " + Fixed(m.agreement.value_or(0)) + " >= " +
                 Fixed(p.shadow_min_agreement) + " over " + std::to_string(r.requests_in_stage) +
                 " requests";
        case Stage::kCanary:
          return "canary feedback " + std::to_string(m.feedback_count) + " >= " +
                 std::to_string(p.canary_min_feedback);
        default:
          return "threshold schedule exhausted";
      }
    case Transition::kHold:
      break;
  }
  return "hold";
}

Transition RolloutManager::Evaluate(std::string_view service) {
  std::lock_guard lock(mu_);
  auto it = services_.find(service);
  if (it == services_.end() || !it->second.active) return Transition::kHold;
  ServiceState& state = it->second;
  Transition t = EvaluateTransition(*state.active, policy_);
  if (t != Transition::kHold) ApplyLocked(state, t, DescribeLocked(*state.active, t));
  return t;
}

Transition RolloutManager::Promote(std::string_view service, const std::string& cause) {
  std::lock_guard lock(mu_);
  ServiceState& state = services_[std::string(service)];
  if (!state.active) {
    if (!registry_.HasChampion(service) && !state.queue.empty()) {
      ModelId head = state.queue.front();
      state.queue.pop_front();
      registry_.SetStage(head, Stage::kFull, cause);
      StartNextLocked(std::string(service));
      return Transition::kPromote;
    }
    throw Error(ErrorCode::kIllegalTransition,
                "service '" + std::string(service) + "' has no rollout to promote");
  }
  ApplyLocked(state, Transition::kPromote, cause);
  return Transition::kPromote;
}

void RolloutManager::Rollback(std::string_view service, const std::string& cause) {
  std::lock_guard lock(mu_);
  auto it = services_.find(service);
  if (it == services_.end() || !it->second.active) {
    throw Error(ErrorCode::kIllegalTransition,
                "service '" + std::string(service) + "' has no rollout to roll back");
  }
  ApplyLocked(it->second, Transition::kRollback, cause);
}

void RolloutManager::AuditThresholdLocked(const RolloutState& r, const std::string& cause) {
  AuditEntry entry;
  entry.at = clock_();
  entry.kind = AuditKind::kThresholdChange;
  entry.subject = r.challenger.ToString();
  entry.actor = "modelgate";
  entry.cause = cause;
  entry.before = "null";
  if (r.stage == Stage::kThresholded && r.threshold_index > 0) {
    entry.before = json::Dump(policy_.threshold_schedule[r.threshold_index - 1]);
  }
  entry.after = json::Dump(policy_.threshold_schedule[r.threshold_index]);
  log_.RecordAudit(std::move(entry));
}

void RolloutManager::ApplyLocked(ServiceState& state, Transition t, const std::string& cause) {
  RolloutState& r = *state.active;
  const std::string service = r.service;
  switch (t) {
    case Transition::kHold:
      return;
    case Transition::kRollback:
      registry_.SetStage(r.challenger, Stage::kRetired, "rollback: " + cause);
      state.active.reset();
      StartNextLocked(service);
      return;
    case Transition::kLowerThreshold:
      ++r.threshold_index;
      r.requests_in_stage = 0;
      r.entered_at = clock_();
      AuditThresholdLocked(r, cause);
      return;
    case Transition::kPromote:
      break;
  }
  switch (r.stage) {
    case Stage::kShadow:
      registry_.SetStage(r.challenger, Stage::kCanary, cause);
      r.stage = Stage::kCanary;
      state.tally.challenger_feedback = state.tally.challenger_good = 0;
      state.tally.champion_feedback = state.tally.champion_good = 0;
      RefreshMetricsLocked(state);
      break;
    case Stage::kCanary:
      registry_.SetStage(r.challenger, Stage::kThresholded, cause);
      r.stage = Stage::kThresholded;
      r.threshold_index = 0;
      AuditThresholdLocked(r, cause);
      break;
    case Stage::kThresholded:
      registry_.SetStage(r.challenger, Stage::kFull, cause);
      state.active.reset();
      StartNextLocked(service);
      return;
    default:
      throw Error(ErrorCode::kIllegalTransition, "rollout in unexpected stage");
  }
  r.requests_in_stage = 0;
  r.entered_at = clock_();
}

void RolloutManager::StartNextLocked(const std::string& service) {
  ServiceState& state = services_[service];
  if (state.active || !registry_.HasChampion(service)) return;
  while (!state.queue.empty()) {
    ModelId next = state.queue.front();
    state.queue.pop_front();
    auto record = registry_.Find(next);
    if (!record || record->stage != Stage::kRegistered) continue;
    StartLocked(next);
    return;
  }
}

}  // namespace modelgate
