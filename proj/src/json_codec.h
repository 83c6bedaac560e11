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

#ifndef MODELGATE_SRC_JSON_CODEC_H_
#define MODELGATE_SRC_JSON_CODEC_H_

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "modelgate/error.h"
#include "modelgate/protocol.h"

namespace modelgate::json {

// Insertion-ordered so that emitted key order is the construction order.
using Json = nlohmann::ordered_json;

Json Parse(std::string_view bytes);  // throws kParseError
std::string Dump(const Json& j);     // compact; throws kInvariantViolation

// Field accessors for decoding. All throw Error(kSchemaError).
const Json& Require(const Json& obj, const char* key);
std::string RequireString(const Json& obj, const char* key);
double RequireNumber(const Json& obj, const char* key);
int64_t RequireInt(const Json& obj, const char* key);
bool RequireBool(const Json& obj, const char* key);
std::optional<std::string> OptionalString(const Json& obj, const char* key);
double NumberOr(const Json& obj, const char* key, double fallback);
int64_t IntOr(const Json& obj, const char* key, int64_t fallback);
bool BoolOr(const Json& obj, const char* key, bool fallback);
void ExpectObject(const Json& j, const char* what);

// Protocol type <-> JSON. The *FromJson functions validate invariants and
// report violations as kSchemaError.
Json ToJson(const FeatureVector& features);
Json ToJson(const Prediction& prediction);
Json ToJson(const ScoreRequest& request);
Json ToJson(const ScoreResponse& response);
Json ToJson(const FeedbackRecord& feedback);
Json ToJson(const VersionNotification& notification);

FeatureVector FeatureVectorFromJson(const Json& j);
ScoreRequest ScoreRequestFromJson(const Json& j);
ScoreResponse ScoreResponseFromJson(const Json& j);
FeedbackRecord FeedbackFromJson(const Json& j);
VersionNotification NotificationFromJson(const Json& j);

// Optional values render as "n/a" in human-facing documents.
Json OrNa(const std::optional<std::string>& value);
Json OrNa(const std::optional<double>& value);

}  // namespace modelgate::json

#endif  // MODELGATE_SRC_JSON_CODEC_H_
