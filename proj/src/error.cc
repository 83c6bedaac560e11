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

#include "modelgate/error.h"

namespace modelgate {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedId: return "MalformedId";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDuplicateVersion: return "DuplicateVersion";
    case ErrorCode::kLineageViolation: return "LineageViolation";
    case ErrorCode::kNoChampion: return "NoChampion";
    case ErrorCode::kIllegalTransition: return "IllegalTransition";
    case ErrorCode::kUnknownModel: return "UnknownModel";
    case ErrorCode::kUnknownRequest: return "UnknownRequest";
    case ErrorCode::kAllBackendsFailed: return "AllBackendsFailed";
    case ErrorCode::kRolloutInProgress: return "RolloutInProgress";
    case ErrorCode::kGateUnavailable: return "GateUnavailable";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kInconsistentSchema: return "InconsistentSchema";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kEmptyWindow: return "EmptyWindow";
    case ErrorCode::kStorageFailure: return "StorageFailure";
    case ErrorCode::kUnknownEscalation: return "UnknownEscalation";
    case ErrorCode::kAlreadyResolved: return "AlreadyResolved";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kScenarioAborted: return "ScenarioAborted";
  }
  return "Unknown";
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedId:
    case ErrorCode::kInvariantViolation:
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
      return 400;
    case ErrorCode::kUnauthorized:
      return 401;
    case ErrorCode::kUnknownModel:
    case ErrorCode::kUnknownRequest:
    case ErrorCode::kUnknownEscalation:
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kDuplicateVersion:
    case ErrorCode::kLineageViolation:
    case ErrorCode::kIllegalTransition:
    case ErrorCode::kRolloutInProgress:
    case ErrorCode::kAlreadyResolved:
      return 409;
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kConfigError:
    case ErrorCode::kTooFewPoints:
    case ErrorCode::kInconsistentSchema:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kEmptyWindow:
    case ErrorCode::kGateUnavailable:
      return 422;
    case ErrorCode::kAllBackendsFailed:
      return 502;
    case ErrorCode::kNoChampion:
      return 503;
    case ErrorCode::kStorageFailure:
    case ErrorCode::kScenarioAborted:
      return 500;
  }
  return 500;
}

}  // namespace modelgate
