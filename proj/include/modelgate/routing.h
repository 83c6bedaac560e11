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

#ifndef MODELGATE_ROUTING_H_
#define MODELGATE_ROUTING_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelgate/protocol.h"

namespace modelgate {

// Which branch of the proxy served (or attempted) a request. The short tags
// are the invocation labels used in reports: champion 4a, challenger 4b,
// fallback 4c, human escalation 4d.
enum class ServeRule { kChampion, kChallengerCanary, kChallengerThreshold, kFallback, kEscalate };

std::string_view ServeRuleName(ServeRule rule);
ServeRule ParseServeRule(std::string_view name);  // throws kSchemaError
std::string_view InvocationTag(ServeRule rule);   // "4a" | "4b" | "4c" | "4d"

struct RouteAttempt {
  std::optional<ModelId> target;  // nullopt only for kEscalate
  ServeRule rule = ServeRule::kChampion;

  friend bool operator==(const RouteAttempt&, const RouteAttempt&) = default;
};

// Output of the policy engine for one request. Attempts before the first
// fallback/escalate entry are primary; the rest form the exception chain and
// run only when the primary answer is missing, low-confidence or the input
// is anomalous.
struct RoutingDecision {
  std::vector<RouteAttempt> serve_path;
  std::vector<ModelId> shadow_targets;
  std::string reason;
  // Confidence bar in force for a kChallengerThreshold attempt.
  std::optional<double> threshold;
  double min_confidence = 0.0;
  bool anomalous = false;

  friend bool operator==(const RoutingDecision&, const RoutingDecision&) = default;
};

// Throws Error(kInvariantViolation): serve_path empty, escalate not last, or
// a shadow target also on the serve path.
void Validate(const RoutingDecision& decision);

bool IsExceptionRule(ServeRule rule);

enum class BackendOutcome { kOk, kTimeout, kError };

std::string_view BackendOutcomeName(BackendOutcome outcome);

// Result of one backend call. Never an exception: failures are data so the
// policy logic can reason about them.
struct BackendResult {
  BackendOutcome outcome = BackendOutcome::kOk;
  std::optional<ScoreResponse> response;  // present iff kOk
  std::string error_code;                 // e.g. "SCHEMA", "HTTP_500"
  std::string error_text;
  double latency_ms = 0.0;

  bool ok() const { return outcome == BackendOutcome::kOk; }

  static BackendResult Ok(ScoreResponse response, double latency_ms);
  static BackendResult Timeout(double latency_ms);
  static BackendResult Failure(std::string code, std::string text, double latency_ms);

  friend bool operator==(const BackendResult&, const BackendResult&) = default;
};

}  // namespace modelgate

#endif  // MODELGATE_ROUTING_H_
