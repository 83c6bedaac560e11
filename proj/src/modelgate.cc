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

#include "modelgate/modelgate.h"

#include <cstdlib>

#include "modelgate/error.h"

namespace modelgate {

namespace {

Clock OrSystem(Clock clock) { return clock ? std::move(clock) : SystemClock(); }

std::string TokenFrom(const std::optional<std::string>& configured) {
  if (configured) return *configured;
  const char* env = std::getenv(kAdminTokenEnv);
  return env != nullptr ? env : "";
}

}  // namespace

Modelgate::Modelgate(ModelgateOptions options)
    : clock_(OrSystem(std::move(options.clock))),
      registry_(clock_),
      escalations_(clock_) {
  registry_.SetAuditSink(&log_);
  if (!options.data_dir.empty()) {
    std::filesystem::create_directories(options.data_dir);
    log_.AttachDirectory(options.data_dir / "log", options.log_segment_size);
    registry_.AttachEventLog(options.data_dir / "registry.jsonl");
  }
  rollouts_ = std::make_unique<RolloutManager>(registry_, log_, clock_, options.policy);
  rollouts_->Recover();
  gateway_ = std::make_unique<Gateway>(registry_, log_, *rollouts_, escalations_, backends_, clock_,
                                       options.gateway);
  escalations_.SetFeedbackSink(
      [this](const FeedbackRecord& fb) { gateway_->HandleFeedback(fb); });
  admin_ = std::make_unique<AdminApi>(registry_, log_, *rollouts_, escalations_, *gateway_, clock_,
                                      TokenFrom(options.admin_token));
}

Modelgate::~Modelgate() {
  escalations_.SetFeedbackSink(nullptr);
  gateway_->Flush();
}

ModelRecord Modelgate::Deploy(const VersionNotification& notification,
                              const RegistrationOptions& options) {
  if (registry_.HasChampion(notification.model_id.service)) {
    throw Error(ErrorCode::kIllegalTransition,
                "service '" + notification.model_id.service + "' already has a champion");
  }
  NotifyAck ack = gateway_->HandleNotify(notification, options);
  if (ack.outcome == NotifyOutcome::kDeferred) {
    rollouts_->Bootstrap(ack.record.id, "initial deployment");
  }
  return registry_.Get(ack.record.id);
}

}  // namespace modelgate
