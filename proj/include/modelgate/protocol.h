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

#ifndef MODELGATE_PROTOCOL_H_
#define MODELGATE_PROTOCOL_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "modelgate/time.h"

// The model-microservice message contract: score, feedback and notify. The
// proxy, the backends and the harness all speak exactly these messages, so a
// gateway can stand in for a model anywhere a model is expected.
namespace modelgate {

// Versioned model identity. Canonical text form: "model-id:<service>.v<n>".
struct ModelId {
  std::string service;
  uint32_t version = 1;

  std::string ToString() const;

  // Throws Error(kMalformedId) unless `text` is in canonical form. Leading
  // zeros in the version are rejected so that Parse and ToString are inverse
  // bijections.
  static ModelId Parse(std::string_view text);

  friend auto operator<=>(const ModelId&, const ModelId&) = default;
  friend bool operator==(const ModelId&, const ModelId&) = default;
};

std::ostream& operator<<(std::ostream& os, const ModelId& id);

struct Feature {
  std::string name;
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Ordered (name, value) pairs. Order is significant and survives the wire.
struct FeatureVector {
  std::vector<Feature> features;

  size_t size() const { return features.size(); }
  std::vector<std::string> Names() const;
  std::vector<double> Values() const;
  const Feature* Find(std::string_view name) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct Prediction {
  std::string result;
  double uncertainty = 0.0;

  double confidence() const { return 1.0 - uncertainty; }

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct ScoreRequest {
  std::string request_id;
  Timestamp timestamp{};
  FeatureVector features;

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

enum class ResponseStatus { kOk, kEscalated };

struct ScoreResponse {
  std::string request_id;
  ModelId served_by;
  // Sorted by descending confidence; ties by ascending label.
  std::vector<Prediction> predictions;
  ResponseStatus status = ResponseStatus::kOk;
  std::optional<std::string> escalation_id;
  double latency_ms = 0.0;

  // nullptr when there are no predictions (escalated without provisional
  // answer).
  const Prediction* Top() const {
    return predictions.empty() ? nullptr : &predictions.front();
  }
  // 1 - min(uncertainty); 0 when empty.
  double TopConfidence() const;

  friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

enum class Verdict { kGood, kBad };

struct FeedbackRecord {
  std::string request_id;
  Verdict verdict = Verdict::kGood;
  std::optional<std::string> true_label;
  Timestamp timestamp{};

  friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

struct VersionNotification {
  ModelId model_id;
  std::optional<ModelId> based_on;
  std::string related_to;  // "service-id:<svc>"
  std::string endpoint;
  std::optional<std::string> test_id;
  std::optional<std::string> signed_off;

  friend bool operator==(const VersionNotification&,
                         const VersionNotification&) = default;
};

enum class MessageKind { kScoreRequest, kScoreResponse, kFeedback, kNotification };

using Message =
    std::variant<ScoreRequest, ScoreResponse, FeedbackRecord, VersionNotification>;

MessageKind KindOf(const Message& message);
std::string_view MessageKindName(MessageKind kind);
MessageKind ParseMessageKind(std::string_view name);

std::string_view StatusName(ResponseStatus status);
std::string_view VerdictName(Verdict verdict);

// Orders predictions by descending confidence, ties by label.
void SortPredictions(std::vector<Prediction>& predictions);
bool PredictionsSorted(const std::vector<Prediction>& predictions);

// Invariant checks. Throw Error(kInvariantViolation).
void Validate(const FeatureVector& features);
void Validate(const ScoreRequest& request);
void Validate(const ScoreResponse& response);
void Validate(const FeedbackRecord& feedback);
void Validate(const VersionNotification& notification);

// Canonical wire form: compact UTF-8 JSON with keys in a fixed order. Equal
// messages encode to identical bytes. Throws Error(kInvariantViolation).
std::string Encode(const ScoreRequest& request);
std::string Encode(const ScoreResponse& response);
std::string Encode(const FeedbackRecord& feedback);
std::string Encode(const VersionNotification& notification);
std::string EncodeMessage(const Message& message);

// Inverse of Encode on canonical bytes. Unknown fields are ignored. Throws
// Error(kParseError) for malformed JSON and Error(kSchemaError) for missing
// or mistyped fields and invariant violations.
ScoreRequest DecodeScoreRequest(std::string_view bytes);
ScoreResponse DecodeScoreResponse(std::string_view bytes);
FeedbackRecord DecodeFeedback(std::string_view bytes);
VersionNotification DecodeNotification(std::string_view bytes);
Message DecodeMessage(MessageKind kind, std::string_view bytes);

}  // namespace modelgate

template <>
struct std::hash<modelgate::ModelId> {
  size_t operator()(const modelgate::ModelId& id) const noexcept {
    return std::hash<std::string>()(id.service) * 31u + id.version;
  }
};

#endif  // MODELGATE_PROTOCOL_H_
