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

#ifndef MODELGATE_MODELGATE_H_
#define MODELGATE_MODELGATE_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "modelgate/admin.h"
#include "modelgate/backend.h"
#include "modelgate/call_log.h"
#include "modelgate/escalation.h"
#include "modelgate/gateway.h"
#include "modelgate/policy.h"
#include "modelgate/registry.h"
#include "modelgate/rollout.h"

namespace modelgate {

struct ModelgateOptions {
  GatewayOptions gateway;
  PolicyConfig policy;
  // Empty keeps everything in memory. Otherwise the registry event log and
  // call-log segments live here and are replayed on start.
  std::filesystem::path data_dir;
  uint64_t log_segment_size = 10000;
  // nullopt reads MODELGATE_ADMIN_TOKEN.
  std::optional<std::string> admin_token;
  Clock clock;  // null means the system clock
};

// Wires registry, call log, rollout manager, escalation queue, gateway and
// admin API for one service. Escalation resolutions feed back through the
// gateway's feedback path.
class Modelgate {
 public:
  explicit Modelgate(ModelgateOptions options);
  ~Modelgate();
  Modelgate(const Modelgate&) = delete;
  Modelgate& operator=(const Modelgate&) = delete;

  Registry& registry() { return registry_; }
  CallLog& log() { return log_; }
  RolloutManager& rollouts() { return *rollouts_; }
  EscalationQueue& escalations() { return escalations_; }
  BackendPool& backends() { return backends_; }
  Gateway& gateway() { return *gateway_; }
  AdminApi& admin() { return *admin_; }
  const Clock& clock() const { return clock_; }

  // Registers the first version of the service and makes it the champion.
  // Throws kIllegalTransition when a champion already exists.
  ModelRecord Deploy(const VersionNotification& notification,
                     const RegistrationOptions& options = {});

 private:
  Clock clock_;
  CallLog log_;
  Registry registry_;
  std::unique_ptr<RolloutManager> rollouts_;
  EscalationQueue escalations_;
  BackendPool backends_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<AdminApi> admin_;
};

}  // namespace modelgate

#endif  // MODELGATE_MODELGATE_H_
