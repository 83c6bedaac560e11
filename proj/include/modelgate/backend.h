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

#ifndef MODELGATE_BACKEND_H_
#define MODELGATE_BACKEND_H_

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "modelgate/protocol.h"
#include "modelgate/routing.h"

namespace modelgate {

inline constexpr std::chrono::milliseconds kDefaultDeadline{500};

// A model microservice as seen by the gateway.
class Backend {
 public:
  virtual ~Backend() = default;

  // May throw; callers go through InvokeBackend.
  virtual BackendResult Score(const ScoreRequest& request,
                              std::chrono::milliseconds deadline) = 0;
  // Returns false when the backend refused or could not be reached.
  virtual bool Feedback(const FeedbackRecord& feedback) = 0;
};

// In-process backend around a scoring function. The reported latency is the
// response's own latency_ms, so simulated backends can model slow calls
// without sleeping.
class FunctionBackend : public Backend {
 public:
  using ScoreFn = std::function<ScoreResponse(const ScoreRequest&)>;
  using FeedbackFn = std::function<bool(const FeedbackRecord&)>;

  explicit FunctionBackend(ScoreFn score, FeedbackFn feedback = nullptr);

  BackendResult Score(const ScoreRequest& request, std::chrono::milliseconds deadline) override;
  bool Feedback(const FeedbackRecord& feedback) override;

 private:
  ScoreFn score_;
  FeedbackFn feedback_;
};

// Speaks the wire protocol to "http://host:port[/prefix]".
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string endpoint);

  BackendResult Score(const ScoreRequest& request, std::chrono::milliseconds deadline) override;
  bool Feedback(const FeedbackRecord& feedback) override;

 private:
  std::string base_;    // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
};

// Totalized call: never throws. Validates the response against the request
// and enforces the deadline.
BackendResult InvokeBackend(Backend* backend, const ScoreRequest& request,
                            std::chrono::milliseconds deadline = kDefaultDeadline);

// Maps registry endpoints to backends. "inproc://<name>" resolves to a
// registered in-process backend; "http://..." to a cached HttpBackend.
class BackendPool {
 public:
  void Register(const std::string& name, std::shared_ptr<Backend> backend);
  std::shared_ptr<Backend> Resolve(std::string_view endpoint);

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Backend>, std::less<>> inproc_;
  std::map<std::string, std::shared_ptr<Backend>, std::less<>> http_;
};

}  // namespace modelgate

#endif  // MODELGATE_BACKEND_H_
