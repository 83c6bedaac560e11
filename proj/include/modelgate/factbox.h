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

#ifndef MODELGATE_FACTBOX_H_
#define MODELGATE_FACTBOX_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "modelgate/call_log.h"
#include "modelgate/registry.h"

namespace modelgate {

struct CanaryResult {
  // "passed", "failed", "in progress" or "n/a", read from the stage history.
  std::string verdict = "n/a";
  // Good-feedback fraction among requests the version served as a canary.
  std::optional<double> pass_rate;
  std::optional<double> previous_pass_rate;  // same metric for based_on
  uint64_t sample_size = 0;

  friend bool operator==(const CanaryResult&, const CanaryResult&) = default;
};

struct ShadowResult {
  std::optional<ModelId> reference;  // based_on
  std::optional<double> agreement;
  uint64_t compared = 0;

  friend bool operator==(const ShadowResult&, const ShadowResult&) = default;
};

// Short provenance note for business users.
struct FactBox {
  ModelId id;
  std::optional<ModelId> based_on;
  std::string related_to;
  Stage stage = Stage::kRegistered;
  std::optional<Timestamp> deployed_at;
  std::optional<std::string> deployment_id;  // only once deployed
  CanaryResult canary;
  ShadowResult shadow;
  std::optional<std::string> test_id;
  std::optional<std::string> signed_off;

  friend bool operator==(const FactBox&, const FactBox&) = default;
};

// Pure assembly from a record and the call log.
FactBox BuildFactBox(const ModelRecord& record, std::span<const LogEntry> log);

// Read-only. Throws kUnknownModel.
FactBox BuildFactBox(const Registry& registry, const CallLog& log, const ModelId& id);

// Every key present; missing values are "n/a".
std::string FactBoxToJson(const FactBox& box);

// Two columns: Provenance and Testing on the left, Usage on the right.
std::string RenderFactBoxText(const FactBox& box);

// 0.995 -> "99.5%", 0.9999 -> "99.99%".
std::string FormatPercent(double fraction);

}  // namespace modelgate

#endif  // MODELGATE_FACTBOX_H_
