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

#ifndef MODELGATE_ESCALATION_H_
#define MODELGATE_ESCALATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "modelgate/protocol.h"
#include "modelgate/routing.h"

namespace modelgate {

enum class EscalationState { kPending, kResolved };

std::string_view EscalationStateName(EscalationState state);
EscalationState ParseEscalationState(std::string_view name);  // throws kSchemaError

// Prediction list a backend produced before the request was escalated.
struct Candidate {
  ModelId model;
  ServeRule rule = ServeRule::kChampion;
  std::vector<Prediction> predictions;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct EscalationContext {
  std::string reason;
  std::vector<Candidate> candidates;

  friend bool operator==(const EscalationContext&, const EscalationContext&) = default;
};

struct Resolution {
  std::string label;
  std::string worker;
  Timestamp at{};

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct Escalation {
  std::string id;
  ScoreRequest request;
  EscalationContext context;
  EscalationState state = EscalationState::kPending;
  std::optional<Resolution> resolution;

  friend bool operator==(const Escalation&, const Escalation&) = default;
};

// Good iff some candidate's top-1 label equals the worker's label.
FeedbackRecord FeedbackFromResolution(const Escalation& escalation, Timestamp at);

// Case-worker queue. Resolution is exactly-once: the first Resolve per id
// wins and emits one FeedbackRecord; later attempts throw kAlreadyResolved.
class EscalationQueue {
 public:
  using FeedbackSink = std::function<void(const FeedbackRecord&)>;

  explicit EscalationQueue(Clock clock);
  EscalationQueue(const EscalationQueue&) = delete;
  EscalationQueue& operator=(const EscalationQueue&) = delete;

  void SetFeedbackSink(FeedbackSink sink);

  // Returns the new id, "esc-000001" onwards.
  std::string Enqueue(ScoreRequest request, EscalationContext context);

  // Throws kUnknownEscalation or kAlreadyResolved. Errors raised by the
  // feedback sink propagate after the resolution is committed.
  Escalation Resolve(const std::string& id, const std::string& label, const std::string& worker);

  std::optional<Escalation> Get(const std::string& id) const;
  std::vector<Escalation> List(std::optional<EscalationState> state = std::nullopt) const;
  size_t pending_count() const;
  uint64_t feedback_emitted() const;

 private:
  Clock clock_;
  mutable std::mutex mu_;
  FeedbackSink sink_;
  uint64_t next_ = 1;
  uint64_t emitted_ = 0;
  std::map<std::string, Escalation> items_;
};

}  // namespace modelgate

#endif  // MODELGATE_ESCALATION_H_
