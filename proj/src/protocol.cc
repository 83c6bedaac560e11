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

#include "modelgate/protocol.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json_codec.h"
#include "modelgate/error.h"

namespace modelgate {

namespace {

constexpr std::string_view kModelIdPrefix = "model-id:";
constexpr std::string_view kServiceIdPrefix = "service-id:";

bool IsServiceChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
}

[[noreturn]] void Malformed(std::string_view text, const char* why) {
  throw Error(ErrorCode::kMalformedId,
              "'" + std::string(text) + "': " + why);
}

[[noreturn]] void Violation(const std::string& message) {
  throw Error(ErrorCode::kInvariantViolation, message);
}

// Runs `fn` and reports invariant violations as schema errors, which is how a
// decoder surfaces them.
template <typename Fn>
auto AsSchemaError(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvariantViolation ||
        e.code() == ErrorCode::kMalformedId ||
        e.code() == ErrorCode::kParseError) {
      throw Error(ErrorCode::kSchemaError, e.detail());
    }
    throw;
  }
}

}  // namespace

std::string ModelId::ToString() const {
  return std::string(kModelIdPrefix) + service + ".v" + std::to_string(version);
}

ModelId ModelId::Parse(std::string_view text) {
  if (!text.starts_with(kModelIdPrefix)) Malformed(text, "missing 'model-id:' prefix");
  std::string_view rest = text.substr(kModelIdPrefix.size());
  size_t dot = rest.rfind(".v");
  if (dot == std::string_view::npos) Malformed(text, "missing '.v<version>'");
  std::string_view service = rest.substr(0, dot);
  std::string_view digits = rest.substr(dot + 2);
  if (service.empty()) Malformed(text, "empty service");
  if (!std::all_of(service.begin(), service.end(), IsServiceChar)) {
    Malformed(text, "invalid character in service");
  }
  if (digits.empty() || digits.size() > 10) Malformed(text, "bad version");
  if (!std::all_of(digits.begin(), digits.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    Malformed(text, "non-numeric version");
  }
  if (digits[0] == '0') Malformed(text, "version must be >= 1 without leading zeros");
  uint64_t version = 0;
  for (char c : digits) version = version * 10 + static_cast<uint64_t>(c - '0');
  if (version > UINT32_MAX) Malformed(text, "version out of range");
  return ModelId{std::string(service), static_cast<uint32_t>(version)};
}

std::ostream& operator<<(std::ostream& os, const ModelId& id) {
  return os << id.ToString();
}

std::vector<std::string> FeatureVector::Names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

std::vector<double> FeatureVector::Values() const {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.value);
  return out;
}

const Feature* FeatureVector::Find(std::string_view name) const {
  for (const auto& f : features) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

double ScoreResponse::TopConfidence() const {
  if (predictions.empty()) return 0.0;
  double min_u = predictions.front().uncertainty;
  for (const auto& p : predictions) min_u = std::min(min_u, p.uncertainty);
  return 1.0 - min_u;
}

MessageKind KindOf(const Message& message) {
  return static_cast<MessageKind>(message.index());
}

std::string_view MessageKindName(MessageKind kind) {
  switch (kind) {
    case MessageKind::kScoreRequest: return "score_request";
    case MessageKind::kScoreResponse: return "score_response";
    case MessageKind::kFeedback: return "feedback";
    case MessageKind::kNotification: return "notification";
  }
  return "unknown";
}

MessageKind ParseMessageKind(std::string_view name) {
  for (auto kind : {MessageKind::kScoreRequest, MessageKind::kScoreResponse,
                    MessageKind::kFeedback, MessageKind::kNotification}) {
    if (MessageKindName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kSchemaError, "unknown message kind '" + std::string(name) + "'");
}

std::string_view StatusName(ResponseStatus status) {
  return status == ResponseStatus::kOk ? "ok" : "escalated";
}

std::string_view VerdictName(Verdict verdict) {
  return verdict == Verdict::kGood ? "good" : "bad";
}

namespace {

bool PredictionBefore(const Prediction& a, const Prediction& b) {
  if (a.uncertainty != b.uncertainty) return a.uncertainty < b.uncertainty;
  return a.result < b.result;
}

}  // namespace

void SortPredictions(std::vector<Prediction>& predictions) {
  std::stable_sort(predictions.begin(), predictions.end(), PredictionBefore);
}

bool PredictionsSorted(const std::vector<Prediction>& predictions) {
  return std::is_sorted(predictions.begin(), predictions.end(), PredictionBefore);
}

void Validate(const FeatureVector& features) {
  std::unordered_set<std::string_view> seen;
  for (const auto& f : features.features) {
    if (f.name.empty()) Violation("feature name must be non-empty");
    if (!seen.insert(f.name).second) Violation("duplicate feature name '" + f.name + "'");
    if (!std::isfinite(f.value)) Violation("feature '" + f.name + "' is not finite");
  }
}

void Validate(const ScoreRequest& request) {
  if (request.request_id.empty()) Violation("request_id must be non-empty");
  Validate(request.features);
}

void Validate(const ScoreResponse& response) {
  if (response.request_id.empty()) Violation("request_id must be non-empty");
  if (response.served_by.service.empty() || response.served_by.version == 0) {
    Violation("served_by is not a valid model id");
  }
  for (const auto& p : response.predictions) {
    if (!std::isfinite(p.uncertainty) || p.uncertainty < 0.0 || p.uncertainty > 1.0) {
      Violation("uncertainty of '" + p.result + "' outside [0,1]");
    }
  }
  if (!PredictionsSorted(response.predictions)) {
    Violation("predictions not in descending-confidence order");
  }
  if (response.status == ResponseStatus::kOk) {
    if (response.predictions.empty()) Violation("ok response needs at least one prediction");
    if (response.escalation_id) Violation("escalation_id present on ok response");
  } else if (!response.escalation_id || response.escalation_id->empty()) {
    Violation("escalated response needs an escalation_id");
  }
  if (!std::isfinite(response.latency_ms) || response.latency_ms < 0.0) {
    Violation("latency_ms must be non-negative");
  }
}

void Validate(const FeedbackRecord& feedback) {
  if (feedback.request_id.empty()) Violation("request_id must be non-empty");
}

void Validate(const VersionNotification& n) {
  if (n.model_id.version == 0 || n.model_id.service.empty()) {
    Violation("model_id is not a valid model id");
  }
  if (n.based_on) {
    if (n.based_on->service != n.model_id.service) {
      Violation("based_on must belong to the same service as model_id");
    }
    if (n.based_on->version >= n.model_id.version) {
      Violation("based_on must have a strictly smaller version");
    }
  }
  if (!n.related_to.starts_with(kServiceIdPrefix) ||
      n.related_to.size() == kServiceIdPrefix.size()) {
    Violation("related_to must look like 'service-id:<svc>'");
  }
  if (n.endpoint.empty()) Violation("endpoint must be non-empty");
}

namespace json {

Json ToJson(const FeatureVector& features) {
  Json arr = Json::array();
  for (const auto& f : features.features) {
    Json item = Json::object();
    item["name"] = f.name;
    item["value"] = f.value;
    arr.push_back(std::move(item));
  }
  return arr;
}

Json ToJson(const Prediction& p) {
  Json j = Json::object();
  j["result"] = p.result;
  j["uncertainty"] = p.uncertainty;
  return j;
}

Json ToJson(const ScoreRequest& r) {
  Json j = Json::object();
  j["request_id"] = r.request_id;
  j["timestamp"] = FormatTimestamp(r.timestamp);
  j["features"] = ToJson(r.features);
  return j;
}

Json ToJson(const ScoreResponse& r) {
  Json j = Json::object();
  j["request_id"] = r.request_id;
  j["served_by"] = r.served_by.ToString();
  Json preds = Json::array();
  for (const auto& p : r.predictions) preds.push_back(ToJson(p));
  j["predictions"] = std::move(preds);
  j["status"] = std::string(StatusName(r.status));
  if (r.escalation_id) j["escalation_id"] = *r.escalation_id;
  j["latency_ms"] = r.latency_ms;
  return j;
}

Json ToJson(const FeedbackRecord& f) {
  Json j = Json::object();
  j["request_id"] = f.request_id;
  j["verdict"] = std::string(VerdictName(f.verdict));
  if (f.true_label) j["true_label"] = *f.true_label;
  j["timestamp"] = FormatTimestamp(f.timestamp);
  return j;
}

Json ToJson(const VersionNotification& n) {
  Json j = Json::object();
  j["model_id"] = n.model_id.ToString();
  if (n.based_on) j["based_on"] = n.based_on->ToString();
  j["related_to"] = n.related_to;
  j["endpoint"] = n.endpoint;
  if (n.test_id) j["test_id"] = *n.test_id;
  if (n.signed_off) j["signed_off"] = *n.signed_off;
  return j;
}

FeatureVector FeatureVectorFromJson(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kSchemaError, "features must be an array");
  FeatureVector fv;
  fv.features.reserve(j.size());
  for (const auto& item : j) {
    ExpectObject(item, "feature");
    fv.features.push_back({RequireString(item, "name"), RequireNumber(item, "value")});
  }
  AsSchemaError([&] { Validate(fv); return 0; });
  return fv;
}

ScoreRequest ScoreRequestFromJson(const Json& j) {
  ExpectObject(j, "ScoreRequest");
  ScoreRequest r;
  r.request_id = RequireString(j, "request_id");
  r.timestamp = AsSchemaError([&] { return ParseTimestamp(RequireString(j, "timestamp")); });
  r.features = FeatureVectorFromJson(Require(j, "features"));
  AsSchemaError([&] { Validate(r); return 0; });
  return r;
}

ScoreResponse ScoreResponseFromJson(const Json& j) {
  ExpectObject(j, "ScoreResponse");
  ScoreResponse r;
  r.request_id = RequireString(j, "request_id");
  r.served_by = AsSchemaError([&] { return ModelId::Parse(RequireString(j, "served_by")); });
  const Json& preds = Require(j, "predictions");
  if (!preds.is_array()) throw Error(ErrorCode::kSchemaError, "predictions must be an array");
  for (const auto& item : preds) {
    ExpectObject(item, "prediction");
    r.predictions.push_back({RequireString(item, "result"), RequireNumber(item, "uncertainty")});
  }
  std::string status = RequireString(j, "status");
  if (status == "ok") {
    r.status = ResponseStatus::kOk;
  } else if (status == "escalated") {
    r.status = ResponseStatus::kEscalated;
  } else {
    throw Error(ErrorCode::kSchemaError, "status must be 'ok' or 'escalated'");
  }
  r.escalation_id = OptionalString(j, "escalation_id");
  r.latency_ms = RequireNumber(j, "latency_ms");
  AsSchemaError([&] { Validate(r); return 0; });
  return r;
}

FeedbackRecord FeedbackFromJson(const Json& j) {
  ExpectObject(j, "FeedbackRecord");
  FeedbackRecord f;
  f.request_id = RequireString(j, "request_id");
  std::string verdict = RequireString(j, "verdict");
  if (verdict == "good") {
    f.verdict = Verdict::kGood;
  } else if (verdict == "bad") {
    f.verdict = Verdict::kBad;
  } else {
    throw Error(ErrorCode::kSchemaError, "verdict must be 'good' or 'bad'");
  }
  f.true_label = OptionalString(j, "true_label");
  f.timestamp = AsSchemaError([&] { return ParseTimestamp(RequireString(j, "timestamp")); });
  AsSchemaError([&] { Validate(f); return 0; });
  return f;
}

VersionNotification NotificationFromJson(const Json& j) {
  ExpectObject(j, "VersionNotification");
  VersionNotification n;
  AsSchemaError([&] {
    n.model_id = ModelId::Parse(RequireString(j, "model_id"));
    if (auto b = OptionalString(j, "based_on")) n.based_on = ModelId::Parse(*b);
    return 0;
  });
  n.related_to = RequireString(j, "related_to");
  n.endpoint = RequireString(j, "endpoint");
  n.test_id = OptionalString(j, "test_id");
  n.signed_off = OptionalString(j, "signed_off");
  AsSchemaError([&] { Validate(n); return 0; });
  return n;
}

}  // namespace json

std::string Encode(const ScoreRequest& request) {
  Validate(request);
  return json::Dump(json::ToJson(request));
}

std::string Encode(const ScoreResponse& response) {
  Validate(response);
  return json::Dump(json::ToJson(response));
}

std::string Encode(const FeedbackRecord& feedback) {
  Validate(feedback);
  return json::Dump(json::ToJson(feedback));
}

std::string Encode(const VersionNotification& notification) {
  Validate(notification);
  return json::Dump(json::ToJson(notification));
}

std::string EncodeMessage(const Message& message) {
  return std::visit([](const auto& m) { return Encode(m); }, message);
}

ScoreRequest DecodeScoreRequest(std::string_view bytes) {
  return json::ScoreRequestFromJson(json::Parse(bytes));
}

ScoreResponse DecodeScoreResponse(std::string_view bytes) {
  return json::ScoreResponseFromJson(json::Parse(bytes));
}

FeedbackRecord DecodeFeedback(std::string_view bytes) {
  return json::FeedbackFromJson(json::Parse(bytes));
}

VersionNotification DecodeNotification(std::string_view bytes) {
  return json::NotificationFromJson(json::Parse(bytes));
}

Message DecodeMessage(MessageKind kind, std::string_view bytes) {
  switch (kind) {
    case MessageKind::kScoreRequest: return DecodeScoreRequest(bytes);
    case MessageKind::kScoreResponse: return DecodeScoreResponse(bytes);
    case MessageKind::kFeedback: return DecodeFeedback(bytes);
    case MessageKind::kNotification: return DecodeNotification(bytes);
  }
  throw Error(ErrorCode::kSchemaError, "unknown message kind");
}

}  // namespace modelgate
