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

#ifndef MODELGATE_ADMIN_H_
#define MODELGATE_ADMIN_H_

#include <map>
#include <string>

#include "modelgate/call_log.h"
#include "modelgate/escalation.h"
#include "modelgate/gateway.h"
#include "modelgate/registry.h"
#include "modelgate/rollout.h"

namespace modelgate {

// Transport-neutral view of an HTTP call. Header names are lower-case.
struct HttpCall {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline constexpr char kAdminTokenEnv[] = "MODELGATE_ADMIN_TOKEN";

// Operator endpoints under /admin. Reads have no side effects. Each
// authorized action call appends exactly one admin_action audit entry with
// actor, cause and before/after state, whether or not it succeeds.
class AdminApi {
 public:
  // An empty token refuses every action.
  AdminApi(Registry& registry, CallLog& log, RolloutManager& rollouts,
           EscalationQueue& escalations, Gateway& gateway, Clock clock, std::string token);

  HttpReply Handle(const HttpCall& call);

 private:
  HttpReply Route(const HttpCall& call);
  bool Authorized(const HttpCall& call) const;

  HttpReply ListModels();
  HttpReply FactBoxOf(const std::string& id, const HttpCall& call);
  HttpReply StatsOf(const std::string& id, const HttpCall& call);
  HttpReply Drift(const HttpCall& call);
  HttpReply Clusters();
  HttpReply RolloutOf(const std::string& service);
  HttpReply Policy();
  HttpReply Escalations(const HttpCall& call);

  HttpReply Promote(const std::string& service, const HttpCall& call);
  HttpReply Rollback(const std::string& service, const HttpCall& call);
  HttpReply PutPolicy(const HttpCall& call);
  HttpReply Resolve(const std::string& id, const HttpCall& call);

  std::string RolloutSnapshot(const std::string& service) const;
  void Audit(const HttpCall& call, const std::string& subject, const std::string& cause,
             std::string before, std::string after);

  Registry& registry_;
  CallLog& log_;
  RolloutManager& rollouts_;
  EscalationQueue& escalations_;
  Gateway& gateway_;
  Clock clock_;
  std::string token_;
};

}  // namespace modelgate

#endif  // MODELGATE_ADMIN_H_
