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

#ifndef MODELGATE_POLICY_H_
#define MODELGATE_POLICY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelgate/clustering.h"
#include "modelgate/protocol.h"
#include "modelgate/registry.h"
#include "modelgate/routing.h"

namespace modelgate {

enum class ExceptionAction { kUseFallback, kEscalate };

struct ClusterGateConfig {
  bool enabled = false;
  double min_cluster_good_rate = 0.8;
  double anomaly_factor = kDefaultAnomalyFactor;
};

struct ExceptionConfig {
  // The exception chain runs when the answer's top-1 confidence is below
  // this, when the primary attempts all failed, or when the input is
  // anomalous. 0 disables the confidence trigger.
  double min_confidence = 0.0;
  std::vector<ExceptionAction> on_exception{ExceptionAction::kUseFallback,
                                            ExceptionAction::kEscalate};
};

struct PromotionConfig {
  uint64_t shadow_min_requests = 1000;
  double shadow_min_agreement = 0.999;
  uint64_t canary_min_feedback = 200;
  double rollback_delta = 0.05;
  uint64_t stage_dwell_requests = 500;
  // When false only rollbacks happen automatically; promotions are manual.
  bool automatic = true;
};

struct PolicyConfig {
  // When false, a notified version replaces the champion at once (direct
  // cutover, the unstaged baseline).
  bool require_staging = true;
  double canary_fraction = 0.1;
  std::string canary_salt = "modelgate";
  std::vector<double> threshold_schedule{0.95, 0.9, 0.8, 0.7};
  ClusterGateConfig cluster_gate;
  ExceptionConfig exception;
  PromotionConfig promotion;

  // Everything off: the gateway is a transparent proxy to the champion.
  static PolicyConfig Disabled();

  // Throws Error(kInvalidConfig).
  void Validate() const;
};

PolicyConfig PolicyFromJson(std::string_view text);  // throws kInvalidConfig
std::string PolicyToJson(const PolicyConfig& config);

struct RolloutMetrics {
  std::optional<double> agreement;             // shadow stage only
  std::optional<double> good_rate_challenger;  // since leaving shadow
  std::optional<double> good_rate_champion;    // since leaving shadow
  uint64_t feedback_count = 0;                 // challenger feedback since leaving shadow

  friend bool operator==(const RolloutMetrics&, const RolloutMetrics&) = default;
};

struct RolloutState {
  std::string service;
  ModelId challenger;
  ModelId champion;
  Stage stage = Stage::kShadow;
  Timestamp entered_at{};
  uint64_t requests_in_stage = 0;
  size_t threshold_index = 0;
  RolloutMetrics metrics;

  friend bool operator==(const RolloutState&, const RolloutState&) = default;
};

// Fresh rollout in shadow with zeroed counters.
RolloutState StartRollout(const ModelId& challenger, const ModelId& champion, Timestamp now);

// FNV-1a 64-bit over salt followed by request_id.
uint64_t Fnv1a64(std::string_view salt, std::string_view text);

// True iff (hash mod 1e6) / 1e6 < fraction. Stateless and reproducible.
bool CanaryAssign(std::string_view request_id, double fraction, std::string_view salt);

enum class ThresholdOutcome { kUseChallenger, kUseChampion };

// Challenger wins iff its top-1 confidence is at least tau.
ThresholdOutcome ApplyThreshold(const ScoreResponse& challenger_response, double tau);

// True iff the input is not anomalous and its cluster's good rate reaches
// the configured minimum. Throws kGateUnavailable when no model is fitted.
bool ClusterGate(const ClusterAssignment& assignment, const ClusterModel* clusters,
                 const ClusterGateConfig& config);

enum class Transition { kHold, kPromote, kLowerThreshold, kRollback };

std::string_view TransitionName(Transition t);

Transition EvaluateTransition(const RolloutState& rollout, const PolicyConfig& config);

// Routing rules, in order: no challenger; shadow; canary; thresholded with
// optional cluster gate; then the exception chain. Pure.
RoutingDecision Decide(const ScoreRequest& request, const ActiveChain& chain,
                       const RolloutState* rollout, const ClusterModel* clusters,
                       const std::optional<ClusterAssignment>& assignment, bool anomalous,
                       const PolicyConfig& config);

}  // namespace modelgate

#endif  // MODELGATE_POLICY_H_
