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

#include "modelgate/policy.h"

#include <algorithm>
#include <cmath>

#include "json_codec.h"
#include "modelgate/error.h"

namespace modelgate {

namespace {

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidConfig, message);
}

void CheckUnit(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    Invalid(std::string(name) + " must be in [0,1]");
  }
}

std::string_view ExceptionActionName(ExceptionAction a) {
  return a == ExceptionAction::kUseFallback ? "use_fallback" : "escalate";
}

bool OnPath(const RoutingDecision& d, const ModelId& id) {
  return std::any_of(d.serve_path.begin(), d.serve_path.end(),
                     [&](const RouteAttempt& a) { return a.target == id; });
}

}  // namespace

PolicyConfig PolicyConfig::Disabled() {
  PolicyConfig c;
  c.require_staging = true;
  c.canary_fraction = 0.0;
  c.cluster_gate.enabled = false;
  c.exception.min_confidence = 0.0;
  c.exception.on_exception.clear();
  c.promotion.automatic = false;
  return c;
}

void PolicyConfig::Validate() const {
  CheckUnit(canary_fraction, "canary_fraction");
  if (threshold_schedule.empty()) Invalid("threshold_schedule must not be empty");
  for (size_t i = 0; i < threshold_schedule.size(); ++i) {
    CheckUnit(threshold_schedule[i], "threshold_schedule entries");
    if (i > 0 && !(threshold_schedule[i] < threshold_schedule[i - 1])) {
      Invalid("threshold_schedule must be strictly descending");
    }
  }
  CheckUnit(cluster_gate.min_cluster_good_rate, "cluster_gate.min_cluster_good_rate");
  if (!std::isfinite(cluster_gate.anomaly_factor) || cluster_gate.anomaly_factor <= 0.0) {
    Invalid("cluster_gate.anomaly_factor must be > 0");
  }
  CheckUnit(exception.min_confidence, "exception.min_confidence");
  CheckUnit(promotion.shadow_min_agreement, "promotion.shadow_min_agreement");
  CheckUnit(promotion.rollback_delta, "promotion.rollback_delta");
}

PolicyConfig PolicyFromJson(std::string_view text) {
  PolicyConfig c;
  try {
    auto j = json::Parse(text);
    json::ExpectObject(j, "policy");
    c.require_staging = json::BoolOr(j, "require_staging", c.require_staging);
    c.canary_fraction = json::NumberOr(j, "canary_fraction", c.canary_fraction);
    if (auto salt = json::OptionalString(j, "canary_salt")) c.canary_salt = *salt;
    if (auto it = j.find("threshold_schedule"); it != j.end()) {
      if (!it->is_array()) Invalid("threshold_schedule must be an array");
      c.threshold_schedule.clear();
      for (const auto& v : *it) {
        if (!v.is_number()) Invalid("threshold_schedule entries must be numbers");
        c.threshold_schedule.push_back(v.get<double>());
      }
    }
    if (auto it = j.find("cluster_gate"); it != j.end()) {
      json::ExpectObject(*it, "cluster_gate");
      auto& g = c.cluster_gate;
      g.enabled = json::BoolOr(*it, "enabled", g.enabled);
      g.min_cluster_good_rate = json::NumberOr(*it, "min_cluster_good_rate", g.min_cluster_good_rate);
      g.anomaly_factor = json::NumberOr(*it, "anomaly_factor", g.anomaly_factor);
    }
    if (auto it = j.find("exception"); it != j.end()) {
      json::ExpectObject(*it, "exception");
      auto& e = c.exception;
      e.min_confidence = json::NumberOr(*it, "min_confidence", e.min_confidence);
      if (auto a = it->find("on_exception"); a != it->end()) {
        if (!a->is_array()) Invalid("on_exception must be an array");
        e.on_exception.clear();
        for (const auto& v : *a) {
          std::string name = v.is_string() ? v.get<std::string>() : "";
          if (name == "use_fallback") {
            e.on_exception.push_back(ExceptionAction::kUseFallback);
          } else if (name == "escalate") {
            e.on_exception.push_back(ExceptionAction::kEscalate);
          } else {
            Invalid("on_exception entries must be 'use_fallback' or 'escalate'");
          }
        }
      }
    }
    if (auto it = j.find("promotion"); it != j.end()) {
      json::ExpectObject(*it, "promotion");
      auto& p = c.promotion;
      auto count = [&](const char* key, uint64_t fallback) {
        int64_t v = json::IntOr(*it, key, static_cast<int64_t>(fallback));
        if (v < 0) Invalid(std::string("promotion.") + key + " must be non-negative");
        return static_cast<uint64_t>(v);
      };
      p.shadow_min_requests = count("shadow_min_requests", p.shadow_min_requests);
      p.shadow_min_agreement = json::NumberOr(*it, "shadow_min_agreement", p.shadow_min_agreement);
      p.canary_min_feedback = count("canary_min_feedback", p.canary_min_feedback);
      p.rollback_delta = json::NumberOr(*it, "rollback_delta", p.rollback_delta);
      p.stage_dwell_requests = count("stage_dwell_requests", p.stage_dwell_requests);
      p.automatic = json::BoolOr(*it, "automatic", p.automatic);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    Invalid(e.detail());
  }
  c.Validate();
  return c;
}

std::string PolicyToJson(const PolicyConfig& c) {
  json::Json j = json::Json::object();
  j["require_staging"] = c.require_staging;
  j["canary_fraction"] = c.canary_fraction;
  j["canary_salt"] = c.canary_salt;
  j["threshold_schedule"] = c.threshold_schedule;
  json::Json gate = json::Json::object();
  gate["enabled"] = c.cluster_gate.enabled;
  gate["min_cluster_good_rate"] = c.cluster_gate.min_cluster_good_rate;
  gate["anomaly_factor"] = c.cluster_gate.anomaly_factor;
  j["cluster_gate"] = std::move(gate);
  json::Json exc = json::Json::object();
  exc["min_confidence"] = c.exception.min_confidence;
  json::Json actions = json::Json::array();
  for (auto a : c.exception.on_exception) actions.push_back(std::string(ExceptionActionName(a)));
  exc["on_exception"] = std::move(actions);
  j["exception"] = std::move(exc);
  json::Json promo = json::Json::object();
  promo["shadow_min_requests"] = c.promotion.shadow_min_requests;
  promo["shadow_min_agreement"] = c.promotion.shadow_min_agreement;
  promo["canary_min_feedback"] = c.promotion.canary_min_feedback;
  promo["rollback_delta"] = c.promotion.rollback_delta;
  promo["stage_dwell_requests"] = c.promotion.stage_dwell_requests;
  promo["automatic"] = c.promotion.automatic;
  j["promotion"] = std::move(promo);
  return json::Dump(j);
}

RolloutState StartRollout(const ModelId& challenger, const ModelId& champion, Timestamp now) {
  RolloutState s;
  s.service = challenger.service;
  s.challenger = challenger;
  s.champion = champion;
  s.stage = Stage::kShadow;
  s.entered_at = now;
  return s;
}

uint64_t Fnv1a64(std::string_view salt, std::string_view text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::string_view part : {salt, text}) {
    for (unsigned char c : part) {
      hash ^= c;
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

bool CanaryAssign(std::string_view request_id, double fraction, std::string_view salt) {
  uint64_t bucket = Fnv1a64(salt, request_id) % 1000000ULL;
  return static_cast<double>(bucket) / 1e6 < fraction;
}

ThresholdOutcome ApplyThreshold(const ScoreResponse& challenger_response, double tau) {
  return challenger_response.TopConfidence() >= tau ? ThresholdOutcome::kUseChallenger
                                                    : ThresholdOutcome::kUseChampion;
}

bool ClusterGate(const ClusterAssignment& assignment, const ClusterModel* clusters,
                 const ClusterGateConfig& config) {
  if (clusters == nullptr || clusters->k() == 0) {
    throw Error(ErrorCode::kGateUnavailable, "no cluster model fitted");
  }
  if (assignment.index >= clusters->k()) {
    throw Error(ErrorCode::kGateUnavailable, "assignment refers to an unknown cluster");
  }
  if (assignment.anomalous) return false;
  const auto& good_rate = clusters->stats[assignment.index].good_rate;
  return good_rate.has_value() && *good_rate >= config.min_cluster_good_rate;
}

std::string_view TransitionName(Transition t) {
  switch (t) {
    case Transition::kHold: return "hold";
    case Transition::kPromote: return "promote";
    case Transition::kLowerThreshold: return "lower_threshold";
    case Transition::kRollback: return "rollback";
  }
  return "unknown";
}

Transition EvaluateTransition(const RolloutState& r, const PolicyConfig& config) {
  const auto& p = config.promotion;
  const auto& m = r.metrics;
  bool past_shadow = r.stage == Stage::kCanary || r.stage == Stage::kThresholded;
  if (past_shadow && m.feedback_count >= p.canary_min_feedback && m.good_rate_challenger &&
      m.good_rate_champion && *m.good_rate_challenger < *m.good_rate_champion - p.rollback_delta) {
    return Transition::kRollback;
  }
  if (!p.automatic) return Transition::kHold;
  switch (r.stage) {
    case Stage::kShadow:
      if (r.requests_in_stage >= p.shadow_min_requests && m.agreement &&
          *m.agreement >= p.shadow_min_agreement) {
        return Transition::kPromote;
      }
      return Transition::kHold;
    case Stage::kCanary:
      return m.feedback_count >= p.canary_min_feedback ? Transition::kPromote : Transition::kHold;
    case Stage::kThresholded:
      if (r.requests_in_stage < p.stage_dwell_requests) return Transition::kHold;
      return r.threshold_index + 1 < config.threshold_schedule.size()
                 ? Transition::kLowerThreshold
                 : Transition::kPromote;
    default:
      return Transition::kHold;
  }
}

RoutingDecision Decide(const ScoreRequest& request, const ActiveChain& chain,
                       const RolloutState* rollout, const ClusterModel* clusters,
                       const std::optional<ClusterAssignment>& assignment, bool anomalous,
                       const PolicyConfig& config) {
  RoutingDecision d;
  d.min_confidence = config.exception.min_confidence;
  d.anomalous = anomalous;
  const ModelId& champion = chain.champion;

  std::optional<Stage> stage = chain.challenger_stage;
  if (rollout != nullptr && chain.challenger && rollout->challenger == *chain.challenger) {
    stage = rollout->stage;
  }

  if (!chain.challenger || !stage) {
    d.serve_path.push_back({champion, ServeRule::kChampion});
    d.reason = "no challenger";
  } else if (*stage == Stage::kShadow) {
    d.serve_path.push_back({champion, ServeRule::kChampion});
    d.reason = "challenger " + chain.challenger->ToString() + " in shadow";
  } else if (*stage == Stage::kCanary) {
    if (CanaryAssign(request.request_id, config.canary_fraction, config.canary_salt)) {
      d.serve_path.push_back({*chain.challenger, ServeRule::kChallengerCanary});
      d.serve_path.push_back({champion, ServeRule::kChampion});
      d.reason = "canary cohort";
    } else {
      d.serve_path.push_back({champion, ServeRule::kChampion});
      d.reason = "outside canary cohort";
    }
  } else if (*stage == Stage::kThresholded) {
    size_t index = rollout != nullptr ? rollout->threshold_index : 0;
    index = std::min(index, config.threshold_schedule.size() - 1);
    bool gate_open = true;
    if (config.cluster_gate.enabled) {
      if (anomalous) {
        gate_open = false;
        d.reason = "cluster gate closed: anomalous input";
      } else if (!assignment || clusters == nullptr) {
        gate_open = false;
        d.reason = "cluster gate closed: no clusters fitted";
      } else {
        try {
          gate_open = ClusterGate(*assignment, clusters, config.cluster_gate);
        } catch (const Error&) {
          gate_open = false;
        }
        if (!gate_open) d.reason = "cluster gate closed: cluster below good-rate minimum";
      }
    }
    if (gate_open) {
      d.threshold = config.threshold_schedule[index];
      d.serve_path.push_back({*chain.challenger, ServeRule::kChallengerThreshold});
      d.serve_path.push_back({champion, ServeRule::kChampion});
      d.reason = "thresholded";
    } else {
      d.serve_path.push_back({champion, ServeRule::kChampion});
    }
  } else {
    d.serve_path.push_back({champion, ServeRule::kChampion});
    d.reason = "no live challenger";
  }

  for (const auto& s : chain.shadows) {
    if (!OnPath(d, s)) d.shadow_targets.push_back(s);
  }

  const auto& exc = config.exception;
  if (!exc.on_exception.empty() && (exc.min_confidence > 0.0 || anomalous)) {
    for (auto action : exc.on_exception) {
      if (action == ExceptionAction::kUseFallback) {
        if (chain.fallback && !OnPath(d, *chain.fallback)) {
          d.serve_path.push_back({*chain.fallback, ServeRule::kFallback});
        }
      } else {
        d.serve_path.push_back({std::nullopt, ServeRule::kEscalate});
        break;
      }
    }
    if (anomalous) d.reason += "; anomalous input";
  }
  return d;
}

}  // namespace modelgate
