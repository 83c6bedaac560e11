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

#include "modelgate/admin.h"

#include <algorithm>
#include <charconv>
#include <vector>

#include "json_codec.h"
#include "log_json.h"
#include "modelgate/analytics.h"
#include "modelgate/drift.h"
#include "modelgate/error.h"
#include "modelgate/factbox.h"
#include "view_json.h"

namespace modelgate {

namespace {

using json::Json;

constexpr size_t kDefaultDriftWindow = 1000;

HttpReply JsonReply(const Json& j, int status = 200) {
  return {status, json::Dump(j), "application/json"};
}

HttpReply ErrorReply(int status, std::string_view code, const std::string& detail) {
  Json j = Json::object();
  j["error"] = std::string(code);
  j["detail"] = detail;
  return JsonReply(j, status);
}

HttpReply ErrorReply(const Error& e) {
  return ErrorReply(HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.detail());
}

std::vector<std::string> Split(std::string_view path) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= path.size()) {
    size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::optional<std::string> QueryParam(const HttpCall& call, const std::string& key) {
  auto it = call.query.find(key);
  if (it == call.query.end()) return std::nullopt;
  return it->second;
}

// Throws kSchemaError on a malformed count.
std::optional<size_t> WindowParam(const HttpCall& call) {
  auto raw = QueryParam(call, "window");
  if (!raw) return std::nullopt;
  size_t n = 0;
  auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), n);
  if (ec != std::errc() || ptr != raw->data() + raw->size() || n == 0) {
    throw Error(ErrorCode::kSchemaError, "window must be a positive integer");
  }
  return n;
}

Json BodyObject(const HttpCall& call) {
  if (call.body.empty()) return Json::object();
  Json j = json::Parse(call.body);
  json::ExpectObject(j, "request body");
  return j;
}

std::string CauseOf(const Json& body) {
  auto cause = json::OptionalString(body, "cause");
  return cause && !cause->empty() ? *cause : "operator request";
}

}  // namespace

AdminApi::AdminApi(Registry& registry, CallLog& log, RolloutManager& rollouts,
                   EscalationQueue& escalations, Gateway& gateway, Clock clock, std::string token)
    : registry_(registry),
      log_(log),
      rollouts_(rollouts),
      escalations_(escalations),
      gateway_(gateway),
      clock_(std::move(clock)),
      token_(std::move(token)) {}

HttpReply AdminApi::Handle(const HttpCall& call) {
  try {
    return Route(call);
  } catch (const Error& e) {
    return ErrorReply(e);
  } catch (const std::exception& e) {
    return ErrorReply(500, "Internal", e.what());
  }
}

bool AdminApi::Authorized(const HttpCall& call) const {
  if (token_.empty()) return false;
  auto it = call.headers.find("authorization");
  if (it == call.headers.end()) return false;
  const std::string expected = "Bearer " + token_;
  const std::string& given = it->second;
  if (given.size() != expected.size()) return false;
  unsigned diff = 0;
  for (size_t i = 0; i < given.size(); ++i) diff |= static_cast<unsigned>(given[i] ^ expected[i]);
  return diff == 0;
}

HttpReply AdminApi::Route(const HttpCall& call) {
  std::vector<std::string> seg = Split(call.path);
  if (seg.empty() || seg[0] != "admin") return ErrorReply(404, "NotFound", call.path);
  const std::string& m = call.method;
  auto is = [&](std::initializer_list<const char*> parts) {
    if (seg.size() != parts.size() + 1) return false;
    size_t i = 1;
    for (const char* p : parts) {
      if (std::string_view(p) != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };
  auto wrong_method = [&] { return ErrorReply(405, "MethodNotAllowed", m + " " + call.path); };
  bool action = m != "GET";
  if (action && !Authorized(call)) {
    return ErrorReply(401, ErrorCodeName(ErrorCode::kUnauthorized),
                      "missing or invalid bearer token");
  }

  if (is({"models"})) return m == "GET" ? ListModels() : wrong_method();
  if (is({"models", "*", "factbox"})) return m == "GET" ? FactBoxOf(seg[2], call) : wrong_method();
  if (is({"models", "*", "stats"})) return m == "GET" ? StatsOf(seg[2], call) : wrong_method();
  if (is({"drift"})) return m == "GET" ? Drift(call) : wrong_method();
  if (is({"clusters"})) return m == "GET" ? Clusters() : wrong_method();
  if (is({"policy"})) {
    if (m == "GET") return Policy();
    if (m == "PUT") return PutPolicy(call);
    return wrong_method();
  }
  if (is({"rollouts", "*"})) return m == "GET" ? RolloutOf(seg[2]) : wrong_method();
  if (is({"rollouts", "*", "promote"})) return m == "POST" ? Promote(seg[2], call) : wrong_method();
  if (is({"rollouts", "*", "rollback"})) {
    return m == "POST" ? Rollback(seg[2], call) : wrong_method();
  }
  if (is({"escalations"})) return m == "GET" ? Escalations(call) : wrong_method();
  if (is({"escalations", "*", "resolve"})) {
    return m == "POST" ? Resolve(seg[2], call) : wrong_method();
  }
  return ErrorReply(404, "NotFound", call.path);
}

HttpReply AdminApi::ListModels() {
  Json models = Json::array();
  for (const auto& r : registry_.List()) models.push_back(json::ToJson(r));
  Json j = Json::object();
  j["models"] = std::move(models);
  return JsonReply(j);
}

HttpReply AdminApi::FactBoxOf(const std::string& id, const HttpCall& call) {
  FactBox box = BuildFactBox(registry_, log_, ModelId::Parse(id));
  if (QueryParam(call, "format") == "text") return {200, RenderFactBoxText(box), "text/plain"};
  return {200, FactBoxToJson(box), "application/json"};
}

HttpReply AdminApi::StatsOf(const std::string& id, const HttpCall& call) {
  ModelId model = ModelId::Parse(id);
  registry_.Get(model);  // 404 for unknown versions
  std::optional<size_t> window = WindowParam(call);
  std::vector<LogEntry> entries = window ? log_.Last(*window) : log_.Entries();
  UsageStats stats = ComputeUsageStats(entries, model);
  return JsonReply(json::ToJson(stats));
}

HttpReply AdminApi::Drift(const HttpCall& call) {
  size_t window = WindowParam(call).value_or(kDefaultDriftWindow);
  std::string reference = QueryParam(call, "reference").value_or("first");
  if (reference != "first" && reference != "previous") {
    throw Error(ErrorCode::kSchemaError, "reference must be 'first' or 'previous'");
  }
  std::vector<FeatureVector> all;
  for (const auto& e : log_.Entries()) {
    if (e.service == gateway_.options().service) all.push_back(e.features);
  }
  size_t n = all.size();
  size_t cur_begin = n > window ? n - window : 0;
  std::span<const FeatureVector> current(all.data() + cur_begin, n - cur_begin);
  std::span<const FeatureVector> ref;
  if (reference == "first") {
    ref = std::span<const FeatureVector>(all.data(), std::min(window, n));
  } else {
    size_t ref_begin = cur_begin > window ? cur_begin - window : 0;
    ref = std::span<const FeatureVector>(all.data() + ref_begin, cur_begin - ref_begin);
  }
  Json j = Json::object();
  j["window"] = window;
  j["reference"] = reference;
  try {
    auto clusters = gateway_.clusters();
    DriftOptions opts;
    opts.anomaly_factor = rollouts_.policy().cluster_gate.anomaly_factor;
    DriftReport report = ComputeDrift(ref, current, clusters.get(), opts);
    j["available"] = true;
    j["report"] = json::ToJson(report);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyWindow) throw;
    j["available"] = false;
    j["reason"] = e.detail();
  }
  return JsonReply(j);
}

HttpReply AdminApi::Clusters() {
  Json j = Json::object();
  auto clusters = gateway_.clusters();
  j["available"] = clusters != nullptr;
  j["model"] = clusters ? json::ToJson(*clusters) : Json(nullptr);
  return JsonReply(j);
}

std::string AdminApi::RolloutSnapshot(const std::string& service) const {
  Json j = Json::object();
  j["service"] = service;
  PolicyConfig policy = rollouts_.policy();
  auto active = rollouts_.Active(service);
  j["active"] = active ? json::ToJson(*active, policy) : Json(nullptr);
  try {
    j["chain"] = json::ToJson(registry_.ResolveChain(service));
  } catch (const Error&) {
    j["chain"] = nullptr;
  }
  Json queued = Json::array();
  for (const auto& id : rollouts_.Queued(service)) queued.push_back(id.ToString());
  j["queued"] = std::move(queued);
  return json::Dump(j);
}

HttpReply AdminApi::RolloutOf(const std::string& service) {
  if (registry_.List(service).empty()) {
    return ErrorReply(404, ErrorCodeName(ErrorCode::kNotFound), "unknown service " + service);
  }
  Json j = json::Parse(RolloutSnapshot(service));
  std::vector<AuditEntry> audit = log_.Audit();
  j["timeline"] = json::Timeline(audit, service);
  return JsonReply(j);
}

HttpReply AdminApi::Policy() { return {200, PolicyToJson(rollouts_.policy()), "application/json"}; }

HttpReply AdminApi::Escalations(const HttpCall& call) {
  std::optional<EscalationState> state;
  if (auto raw = QueryParam(call, "state"); raw && *raw != "all") {
    state = ParseEscalationState(*raw);
  }
  Json items = Json::array();
  for (const auto& e : escalations_.List(state)) items.push_back(json::ToJson(e));
  Json j = Json::object();
  j["escalations"] = std::move(items);
  return JsonReply(j);
}

void AdminApi::Audit(const HttpCall& call, const std::string& subject, const std::string& cause,
                     std::string before, std::string after) {
  AuditEntry entry;
  entry.at = clock_();
  entry.kind = AuditKind::kAdminAction;
  entry.subject = subject;
  auto actor = call.headers.find("x-modelgate-actor");
  entry.actor = actor != call.headers.end() && !actor->second.empty() ? actor->second : "admin";
  entry.cause = call.method + " " + call.path + ": " + cause;
  entry.before = std::move(before);
  entry.after = std::move(after);
  log_.RecordAudit(std::move(entry));
}

namespace {

std::string ErrorState(const Error& e) {
  Json j = Json::object();
  j["error"] = std::string(ErrorCodeName(e.code()));
  j["detail"] = e.detail();
  return json::Dump(j);
}

}  // namespace

HttpReply AdminApi::Promote(const std::string& service, const HttpCall& call) {
  Json body = BodyObject(call);
  std::string cause = CauseOf(body);
  if (registry_.List(service).empty()) {
    return ErrorReply(404, ErrorCodeName(ErrorCode::kNotFound), "unknown service " + service);
  }
  std::string before = RolloutSnapshot(service);
  try {
    rollouts_.Promote(service, "manual promote: " + cause);
  } catch (const Error& e) {
    Audit(call, service, cause, before, ErrorState(e));
    int status = e.code() == ErrorCode::kNoChampion ? 409 : HttpStatusFor(e.code());
    return ErrorReply(status, ErrorCodeName(e.code()), e.detail());
  }
  std::string after = RolloutSnapshot(service);
  Audit(call, service, cause, before, after);
  return {200, after, "application/json"};
}

HttpReply AdminApi::Rollback(const std::string& service, const HttpCall& call) {
  Json body = BodyObject(call);
  std::string cause = CauseOf(body);
  if (registry_.List(service).empty()) {
    return ErrorReply(404, ErrorCodeName(ErrorCode::kNotFound), "unknown service " + service);
  }
  std::string before = RolloutSnapshot(service);
  try {
    rollouts_.Rollback(service, "manual rollback: " + cause);
  } catch (const Error& e) {
    Audit(call, service, cause, before, ErrorState(e));
    return ErrorReply(e);
  }
  std::string after = RolloutSnapshot(service);
  Audit(call, service, cause, before, after);
  return {200, after, "application/json"};
}

HttpReply AdminApi::PutPolicy(const HttpCall& call) {
  std::string before = PolicyToJson(rollouts_.policy());
  Json patch = BodyObject(call);
  std::string cause = CauseOf(patch);
  patch.erase("cause");
  try {
    Json merged = json::Parse(before);
    merged.merge_patch(patch);
    PolicyConfig next = PolicyFromJson(json::Dump(merged));
    rollouts_.SetPolicy(next);
  } catch (const Error& e) {
    Audit(call, "policy", cause, before, ErrorState(e));
    return ErrorReply(422, ErrorCodeName(e.code()), e.detail());
  }
  std::string after = PolicyToJson(rollouts_.policy());
  Audit(call, "policy", cause, before, after);
  return {200, after, "application/json"};
}

HttpReply AdminApi::Resolve(const std::string& id, const HttpCall& call) {
  Json body = BodyObject(call);
  std::string label = json::RequireString(body, "label");
  std::string worker = json::RequireString(body, "worker");
  std::string cause = CauseOf(body);
  auto existing = escalations_.Get(id);
  std::string before = existing ? json::Dump(json::ToJson(*existing)) : "null";
  try {
    Escalation resolved = escalations_.Resolve(id, label, worker);
    std::string after = json::Dump(json::ToJson(resolved));
    Audit(call, id, cause, before, after);
    return {200, after, "application/json"};
  } catch (const Error& e) {
    Audit(call, id, cause, before, ErrorState(e));
    return ErrorReply(e);
  }
}

}  // namespace modelgate
