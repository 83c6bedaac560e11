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

#include "modelgate/escalation.h"

#include <cstdio>

#include "modelgate/error.h"

namespace modelgate {

std::string_view EscalationStateName(EscalationState state) {
  return state == EscalationState::kPending ? "pending" : "resolved";
}

EscalationState ParseEscalationState(std::string_view name) {
  if (name == "pending") return EscalationState::kPending;
  if (name == "resolved") return EscalationState::kResolved;
  throw Error(ErrorCode::kSchemaError, "unknown escalation state '" + std::string(name) + "'");
}

FeedbackRecord FeedbackFromResolution(const Escalation& escalation, Timestamp at) {
  FeedbackRecord fb;
  fb.request_id = escalation.request.request_id;
  fb.timestamp = at;
  fb.verdict = Verdict::kBad;
  if (escalation.resolution) {
    fb.true_label = escalation.resolution->label;
    for (const auto& c : escalation.context.candidates) {
      if (!c.predictions.empty() && c.predictions.front().result == escalation.resolution->label) {
        fb.verdict = Verdict::kGood;
        break;
      }
    }
  }
  return fb;
}

EscalationQueue::EscalationQueue(Clock clock) : clock_(std::move(clock)) {}

void EscalationQueue::SetFeedbackSink(FeedbackSink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

std::string EscalationQueue::Enqueue(ScoreRequest request, EscalationContext context) {
  std::lock_guard lock(mu_);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "esc-%06llu", static_cast<unsigned long long>(next_++));
  Escalation e;
  e.id = buf;
  e.request = std::move(request);
  e.context = std::move(context);
  items_.emplace(e.id, e);
  return e.id;
}

Escalation EscalationQueue::Resolve(const std::string& id, const std::string& label,
                                    const std::string& worker) {
  Escalation resolved;
  FeedbackSink sink;
  {
    std::lock_guard lock(mu_);
    auto it = items_.find(id);
    if (it == items_.end()) throw Error(ErrorCode::kUnknownEscalation, id);
    if (it->second.state == EscalationState::kResolved) {
      throw Error(ErrorCode::kAlreadyResolved,
                  id + " was resolved by " + it->second.resolution->worker);
    }
    it->second.state = EscalationState::kResolved;
    it->second.resolution = Resolution{label, worker, clock_()};
    ++emitted_;
    resolved = it->second;
    sink = sink_;
  }
  if (sink) sink(FeedbackFromResolution(resolved, resolved.resolution->at));
  return resolved;
}

std::optional<Escalation> EscalationQueue::Get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = items_.find(id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::vector<Escalation> EscalationQueue::List(std::optional<EscalationState> state) const {
  std::lock_guard lock(mu_);
  std::vector<Escalation> out;
  for (const auto& [id, e] : items_) {
    if (!state || e.state == *state) out.push_back(e);
  }
  return out;
}

size_t EscalationQueue::pending_count() const {
  std::lock_guard lock(mu_);
  size_t n = 0;
  for (const auto& [id, e] : items_) n += e.state == EscalationState::kPending;
  return n;
}

uint64_t EscalationQueue::feedback_emitted() const {
  std::lock_guard lock(mu_);
  return emitted_;
}

}  // namespace modelgate
