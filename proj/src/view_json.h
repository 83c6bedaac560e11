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

#ifndef MODELGATE_SRC_VIEW_JSON_H_
#define MODELGATE_SRC_VIEW_JSON_H_

#include <span>

#include "json_codec.h"
#include "modelgate/analytics.h"
#include "modelgate/drift.h"
#include "modelgate/escalation.h"
#include "modelgate/policy.h"
#include "modelgate/registry.h"

// JSON documents served by the control plane and embedded in reports.
namespace modelgate::json {

Json ToJson(const StageChange& change);
Json ToJson(const ModelRecord& record);
Json ToJson(const ActiveChain& chain);
Json ToJson(const RolloutState& state, const PolicyConfig& policy);
Json ToJson(const UsageStats& stats);
Json ToJson(const DriftReport& report);
Json ToJson(const Escalation& escalation);

// Stage and threshold changes touching `service`, in log order.
Json Timeline(std::span<const AuditEntry> audit, std::string_view service);

}  // namespace modelgate::json

#endif  // MODELGATE_SRC_VIEW_JSON_H_
