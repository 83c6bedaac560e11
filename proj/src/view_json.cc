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

#include "view_json.h"

namespace modelgate::json {

namespace {

Json IdOrNull(const std::optional<ModelId>& id) {
  return id ? Json(id->ToString()) : Json(nullptr);
}

template <typename T>
Json OrNull(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

// Subject is a model id or a service name.
bool SubjectInService(const std::string& subject, std::string_view service) {
  if (subject == service) return true;
  try {
    return ModelId::Parse(subject).service == service;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

Json ToJson(const StageChange& change) {
  Json j = Json::object();
  j["id"] = change.id.ToString();
  j["from"] = std::string(StageName(change.from));
  j["to"] = std::string(StageName(change.to));
  j["cause"] = change.cause;
  j["at"] = FormatTimestamp(change.at);
  return j;
}

Json ToJson(const ModelRecord& r) {
  Json j = Json::object();
  j["id"] = r.id.ToString();
  j["endpoint"] = r.endpoint;
  j["based_on"] = IdOrNull(r.based_on);
  j["related_to"] = r.related_to;
  j["stage"] = std::string(StageName(r.stage));
  j["registered_at"] = FormatTimestamp(r.registered_at);
  j["deployed_at"] = r.deployed_at ? Json(FormatTimestamp(*r.deployed_at)) : Json(nullptr);
  j["deployment_id"] = r.deployment_id;
  j["test_id"] = OrNull(r.test_id);
  j["signed_off"] = OrNull(r.signed_off);
  Json history = Json::array();
  for (const auto& c : r.history) history.push_back(ToJson(c));
  j["history"] = std::move(history);
  return j;
}

Json ToJson(const ActiveChain& chain) {
  Json j = Json::object();
  j["service"] = chain.service;
  j["champion"] = chain.champion.ToString();
  j["challenger"] = IdOrNull(chain.challenger);
  j["challenger_stage"] =
      chain.challenger_stage ? Json(std::string(StageName(*chain.challenger_stage))) : Json(nullptr);
  j["fallback"] = IdOrNull(chain.fallback);
  Json shadows = Json::array();
  for (const auto& s : chain.shadows) shadows.push_back(s.ToString());
  j["shadows"] = std::move(shadows);
  return j;
}

Json ToJson(const RolloutState& s, const PolicyConfig& policy) {
  Json j = Json::object();
  j["service"] = s.service;
  j["challenger"] = s.challenger.ToString();
  j["champion"] = s.champion.ToString();
  j["stage"] = std::string(StageName(s.stage));
  j["entered_at"] = FormatTimestamp(s.entered_at);
  j["requests_in_stage"] = s.requests_in_stage;
  j["threshold_index"] = s.threshold_index;
  j["threshold"] = s.stage == Stage::kThresholded && s.threshold_index < policy.threshold_schedule.size()
                       ? Json(policy.threshold_schedule[s.threshold_index])
                       : Json(nullptr);
  Json m = Json::object();
  m["agreement"] = OrNull(s.metrics.agreement);
  m["good_rate_challenger"] = OrNull(s.metrics.good_rate_challenger);
  m["good_rate_champion"] = OrNull(s.metrics.good_rate_champion);
  m["feedback_count"] = s.metrics.feedback_count;
  j["metrics"] = std::move(m);
  return j;
}

Json ToJson(const UsageStats& s) {
  Json j = Json::object();
  j["model"] = s.model.ToString();
  j["window"] = {s.from_seq, s.to_seq};
  j["call_count"] = s.call_count;
  j["escalated_without_predictions"] = s.escalated_without_predictions;
  Json labels = Json::object();
  for (const auto& [label, n] : s.label_distribution) labels[label] = n;
  j["label_distribution"] = std::move(labels);
  j["mean_confidence"] = s.mean_confidence;
  j["confidence_histogram"] = s.confidence_histogram;
  Json latency = Json::object();
  latency["p50"] = s.latency.p50;
  latency["p95"] = s.latency.p95;
  latency["p99"] = s.latency.p99;
  j["latency_ms"] = std::move(latency);
  j["feedback_count"] = s.feedback_count;
  j["good_rate"] = OrNull(s.good_rate);
  return j;
}

Json ToJson(const DriftReport& r) {
  Json j = Json::object();
  Json per = Json::object();
  for (const auto& [name, psi] : r.per_feature) per[name] = psi;
  j["per_feature"] = std::move(per);
  j["aggregate"] = r.aggregate;
  j["anomalous_rate"] = r.anomalous_rate;
  j["clusters_available"] = r.clusters_available;
  j["alarm"] = r.alarm;
  j["reference_size"] = r.reference_size;
  j["current_size"] = r.current_size;
  return j;
}

Json ToJson(const Escalation& e) {
  Json j = Json::object();
  j["id"] = e.id;
  j["state"] = std::string(EscalationStateName(e.state));
  j["request"] = ToJson(e.request);
  Json context = Json::object();
  context["reason"] = e.context.reason;
  Json candidates = Json::array();
  for (const auto& c : e.context.candidates) {
    Json item = Json::object();
    item["model"] = c.model.ToString();
    item["rule"] = std::string(ServeRuleName(c.rule));
    Json preds = Json::array();
    for (const auto& p : c.predictions) preds.push_back(ToJson(p));
    item["predictions"] = std::move(preds);
    candidates.push_back(std::move(item));
  }
  context["candidates"] = std::move(candidates);
  j["context"] = std::move(context);
  if (e.resolution) {
    Json res = Json::object();
    res["label"] = e.resolution->label;
    res["worker"] = e.resolution->worker;
    res["at"] = FormatTimestamp(e.resolution->at);
    j["resolution"] = std::move(res);
  } else {
    j["resolution"] = nullptr;
  }
  return j;
}

Json Timeline(std::span<const AuditEntry> audit, std::string_view service) {
  Json out = Json::array();
  for (const auto& a : audit) {
    if (a.kind != AuditKind::kStageChange && a.kind != AuditKind::kThresholdChange) continue;
    if (!SubjectInService(a.subject, service)) continue;
    Json item = Json::object();
    item["seq"] = a.seq;
    item["at"] = FormatTimestamp(a.at);
    item["kind"] = std::string(AuditKindName(a.kind));
    item["subject"] = a.subject;
    item["before"] = Parse(a.before);
    item["after"] = Parse(a.after);
    item["cause"] = a.cause;
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace modelgate::json
