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

#include "modelgate/routing.h"

#include <algorithm>

#include "modelgate/error.h"

namespace modelgate {

std::string_view ServeRuleName(ServeRule rule) {
  switch (rule) {
    case ServeRule::kChampion: return "champion";
    case ServeRule::kChallengerCanary: return "challenger_canary";
    case ServeRule::kChallengerThreshold: return "challenger_threshold";
    case ServeRule::kFallback: return "fallback";
    case ServeRule::kEscalate: return "escalate";
  }
  return "unknown";
}

ServeRule ParseServeRule(std::string_view name) {
  for (ServeRule r : {ServeRule::kChampion, ServeRule::kChallengerCanary,
                      ServeRule::kChallengerThreshold, ServeRule::kFallback,
                      ServeRule::kEscalate}) {
    if (ServeRuleName(r) == name) return r;
  }
  throw Error(ErrorCode::kSchemaError, "unknown serve rule '" + std::string(name) + "'");
}

std::string_view InvocationTag(ServeRule rule) {
  switch (rule) {
    case ServeRule::kChampion: return "4a";
    case ServeRule::kChallengerCanary:
    case ServeRule::kChallengerThreshold: return "4b";
    case ServeRule::kFallback: return "4c";
    case ServeRule::kEscalate: return "4d";
  }
  return "?";
}

bool IsExceptionRule(ServeRule rule) {
  return rule == ServeRule::kFallback || rule == ServeRule::kEscalate;
}

void Validate(const RoutingDecision& decision) {
  if (decision.serve_path.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "serve_path is empty");
  }
  for (size_t i = 0; i < decision.serve_path.size(); ++i) {
    const auto& a = decision.serve_path[i];
    if (a.rule == ServeRule::kEscalate) {
      if (i + 1 != decision.serve_path.size()) {
        throw Error(ErrorCode::kInvariantViolation, "escalate must be the last attempt");
      }
    } else if (!a.target) {
      throw Error(ErrorCode::kInvariantViolation, "model attempt without target");
    }
    if (a.target && std::find(decision.shadow_targets.begin(), decision.shadow_targets.end(),
                              *a.target) != decision.shadow_targets.end()) {
      throw Error(ErrorCode::kInvariantViolation,
                  a.target->ToString() + " is both served and shadowed");
    }
  }
}

std::string_view BackendOutcomeName(BackendOutcome outcome) {
  switch (outcome) {
    case BackendOutcome::kOk: return "ok";
    case BackendOutcome::kTimeout: return "timeout";
    case BackendOutcome::kError: return "error";
  }
  return "unknown";
}

BackendResult BackendResult::Ok(ScoreResponse response, double latency_ms) {
  BackendResult r;
  r.outcome = BackendOutcome::kOk;
  r.response = std::move(response);
  r.latency_ms = latency_ms;
  return r;
}

BackendResult BackendResult::Timeout(double latency_ms) {
  BackendResult r;
  r.outcome = BackendOutcome::kTimeout;
  r.error_code = "TIMEOUT";
  r.latency_ms = latency_ms;
  return r;
}

BackendResult BackendResult::Failure(std::string code, std::string text, double latency_ms) {
  BackendResult r;
  r.outcome = BackendOutcome::kError;
  r.error_code = std::move(code);
  r.error_text = std::move(text);
  r.latency_ms = latency_ms;
  return r;
}

}  // namespace modelgate
