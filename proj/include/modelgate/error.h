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

#ifndef MODELGATE_ERROR_H_
#define MODELGATE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace modelgate {

enum class ErrorCode {
  // protocol
  kMalformedId,
  kInvariantViolation,
  kParseError,
  kSchemaError,
  // registry
  kDuplicateVersion,
  kLineageViolation,
  kNoChampion,
  kIllegalTransition,
  kUnknownModel,
  // router
  kUnknownRequest,
  kAllBackendsFailed,
  // policy
  kRolloutInProgress,
  kGateUnavailable,
  kInvalidConfig,
  // analytics
  kTooFewPoints,
  kInconsistentSchema,
  kSchemaMismatch,
  kEmptyWindow,
  kStorageFailure,
  // control plane
  kUnknownEscalation,
  kAlreadyResolved,
  kUnauthorized,
  kNotFound,
  // harness
  kConfigError,
  kScenarioAborted,
};

std::string_view ErrorCodeName(ErrorCode code);

// Status code used by the HTTP surfaces for an error of this class.
int HttpStatusFor(ErrorCode code);

// All fallible operations in the library throw Error. The code identifies the
// failure class; the message carries detail for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace modelgate

#endif  // MODELGATE_ERROR_H_
