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

#include "modelgate/backend.h"

#include <httplib.h>

#include <exception>

#include "modelgate/error.h"

namespace modelgate {

namespace {

constexpr std::string_view kInprocScheme = "inproc://";
constexpr std::string_view kHttpScheme = "http://";

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

FunctionBackend::FunctionBackend(ScoreFn score, FeedbackFn feedback)
    : score_(std::move(score)), feedback_(std::move(feedback)) {}

BackendResult FunctionBackend::Score(const ScoreRequest& request,
                                     std::chrono::milliseconds /*deadline*/) {
  ScoreResponse response = score_(request);
  double latency = response.latency_ms;
  return BackendResult::Ok(std::move(response), latency);
}

bool FunctionBackend::Feedback(const FeedbackRecord& feedback) {
  return feedback_ ? feedback_(feedback) : true;
}

HttpBackend::HttpBackend(std::string endpoint) {
  if (!endpoint.starts_with(kHttpScheme)) {
    throw Error(ErrorCode::kInvalidConfig, "not an http endpoint: " + endpoint);
  }
  size_t slash = endpoint.find('/', kHttpScheme.size());
  if (slash == std::string::npos) {
    base_ = endpoint;
  } else {
    base_ = endpoint.substr(0, slash);
    prefix_ = endpoint.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

BackendResult HttpBackend::Score(const ScoreRequest& request,
                                 std::chrono::milliseconds deadline) {
  httplib::Client client(base_);
  client.set_connection_timeout(deadline);
  client.set_read_timeout(deadline);
  client.set_write_timeout(deadline);
  auto start = std::chrono::steady_clock::now();
  auto res = client.Post(prefix_ + "/v1/score", Encode(request), "application/json");
  double latency = ElapsedMs(start);
  if (!res) {
    httplib::Error err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && latency >= static_cast<double>(deadline.count()))) {
      return BackendResult::Timeout(latency);
    }
    return BackendResult::Failure("CONNECT", httplib::to_string(err), latency);
  }
  if (res->status != 200) {
    return BackendResult::Failure("HTTP_" + std::to_string(res->status), res->body, latency);
  }
  try {
    return BackendResult::Ok(DecodeScoreResponse(res->body), latency);
  } catch (const Error& e) {
    return BackendResult::Failure("SCHEMA", e.what(), latency);
  }
}

bool HttpBackend::Feedback(const FeedbackRecord& feedback) {
  httplib::Client client(base_);
  client.set_connection_timeout(kDefaultDeadline);
  client.set_read_timeout(kDefaultDeadline);
  auto res = client.Post(prefix_ + "/v1/feedback", Encode(feedback), "application/json");
  return res && res->status == 200;
}

BackendResult InvokeBackend(Backend* backend, const ScoreRequest& request,
                            std::chrono::milliseconds deadline) {
  if (backend == nullptr) return BackendResult::Failure("UNREACHABLE", "no backend", 0.0);
  BackendResult result;
  try {
    result = backend->Score(request, deadline);
  } catch (const Error& e) {
    return BackendResult::Failure(std::string(ErrorCodeName(e.code())), e.what(), 0.0);
  } catch (const std::exception& e) {
    return BackendResult::Failure("EXCEPTION", e.what(), 0.0);
  }
  if (result.latency_ms > static_cast<double>(deadline.count())) {
    return BackendResult::Timeout(result.latency_ms);
  }
  if (!result.ok()) return result;
  if (!result.response) return BackendResult::Failure("SCHEMA", "missing response", result.latency_ms);
  try {
    Validate(*result.response);
  } catch (const Error& e) {
    return BackendResult::Failure("SCHEMA", e.what(), result.latency_ms);
  }
  if (result.response->request_id != request.request_id) {
    return BackendResult::Failure("SCHEMA", "response for a different request_id",
                                  result.latency_ms);
  }
  if (result.response->predictions.empty()) {
    return BackendResult::Failure("SCHEMA", "no predictions", result.latency_ms);
  }
  return result;
}

void BackendPool::Register(const std::string& name, std::shared_ptr<Backend> backend) {
  std::lock_guard lock(mu_);
  inproc_[name] = std::move(backend);
}

std::shared_ptr<Backend> BackendPool::Resolve(std::string_view endpoint) {
  std::lock_guard lock(mu_);
  if (endpoint.starts_with(kInprocScheme)) {
    auto it = inproc_.find(endpoint.substr(kInprocScheme.size()));
    return it == inproc_.end() ? nullptr : it->second;
  }
  if (endpoint.starts_with(kHttpScheme)) {
    auto it = http_.find(endpoint);
    if (it != http_.end()) return it->second;
    auto backend = std::make_shared<HttpBackend>(std::string(endpoint));
    http_.emplace(std::string(endpoint), backend);
    return backend;
  }
  return nullptr;
}

}  // namespace modelgate
