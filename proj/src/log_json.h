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

#ifndef MODELGATE_SRC_LOG_JSON_H_
#define MODELGATE_SRC_LOG_JSON_H_

#include "json_codec.h"
#include "modelgate/call_log.h"
#include "modelgate/clustering.h"
#include "modelgate/routing.h"

namespace modelgate::json {

Json ToJson(const BackendResult& result);
BackendResult BackendResultFromJson(const Json& j);

Json ToJson(const ClusterAssignment& assignment);
Json ToJson(const ClusterModel& model);

Json ToJson(const LogEntry& entry);  // core fields only
LogEntry LogEntryFromJson(const Json& j);

Json ToJson(const ShadowOutcome& outcome);
ShadowOutcome ShadowOutcomeFromJson(const Json& j);

Json ToJson(const AuditEntry& entry);
AuditEntry AuditEntryFromJson(const Json& j);

Json ToJson(const RoutingDecision& decision);

}  // namespace modelgate::json

#endif  // MODELGATE_SRC_LOG_JSON_H_
