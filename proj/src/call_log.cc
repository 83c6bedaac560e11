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

#include "modelgate/call_log.h"

#include <algorithm>
#include <map>

#include "log_json.h"
#include "modelgate/error.h"

namespace modelgate {

namespace {

std::string SegmentName(uint64_t first_seq) {
  return "log-" + std::to_string(first_seq) + ".jsonl";
}

// Segment files sorted by their first sequence number.
std::vector<std::filesystem::path> ListSegments(const std::filesystem::path& dir) {
  std::map<uint64_t, std::filesystem::path> by_seq;
  if (!std::filesystem::exists(dir)) return {};
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    std::string name = item.path().filename().string();
    if (!name.starts_with("log-") || !name.ends_with(".jsonl")) continue;
    std::string digits = name.substr(4, name.size() - 4 - 6);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
    by_seq.emplace(std::stoull(digits), item.path());
  }
  std::vector<std::filesystem::path> out;
  for (auto& [seq, path] : by_seq) out.push_back(path);
  return out;
}

}  // namespace

bool LogEntry::shadow_disagreement() const {
  return std::any_of(shadows.begin(), shadows.end(),
                     [](const ShadowOutcome& s) { return s.disagrees; });
}

std::optional<std::string> LogEntry::TopLabelOf(const ModelId& model) const {
  for (const auto& inv : invocations) {
    if (inv.model == model && inv.result.ok() && inv.result.response->Top() != nullptr) {
      return inv.result.response->Top()->result;
    }
  }
  for (const auto& s : shadows) {
    if (s.model == model && s.result.ok() && s.result.response->Top() != nullptr) {
      return s.result.response->Top()->result;
    }
  }
  return std::nullopt;
}

std::string_view AuditKindName(AuditKind kind) {
  switch (kind) {
    case AuditKind::kStageChange: return "stage_change";
    case AuditKind::kThresholdChange: return "threshold_change";
    case AuditKind::kPolicyChange: return "policy_change";
    case AuditKind::kAdminAction: return "admin_action";
  }
  return "unknown";
}

namespace json {

Json ToJson(const BackendResult& r) {
  Json j = Json::object();
  j["outcome"] = std::string(BackendOutcomeName(r.outcome));
  j["latency_ms"] = r.latency_ms;
  if (r.response) j["response"] = ToJson(*r.response);
  if (!r.error_code.empty()) j["code"] = r.error_code;
  if (!r.error_text.empty()) j["text"] = r.error_text;
  return j;
}

BackendResult BackendResultFromJson(const Json& j) {
  BackendResult r;
  std::string outcome = RequireString(j, "outcome");
  if (outcome == "ok") {
    r.outcome = BackendOutcome::kOk;
  } else if (outcome == "timeout") {
    r.outcome = BackendOutcome::kTimeout;
  } else if (outcome == "error") {
    r.outcome = BackendOutcome::kError;
  } else {
    throw Error(ErrorCode::kSchemaError, "unknown backend outcome '" + outcome + "'");
  }
  r.latency_ms = RequireNumber(j, "latency_ms");
  if (auto it = j.find("response"); it != j.end()) r.response = ScoreResponseFromJson(*it);
  r.error_code = OptionalString(j, "code").value_or("");
  r.error_text = OptionalString(j, "text").value_or("");
  return r;
}

Json ToJson(const ClusterAssignment& a) {
  Json j = Json::object();
  j["index"] = a.index;
  j["distance"] = a.distance;
  j["anomalous"] = a.anomalous;
  return j;
}

Json ToJson(const ClusterModel& m) {
  Json j = Json::object();
  j["k"] = m.k();
  j["feature_names"] = m.feature_names;
  j["fitted_at"] = FormatTimestamp(m.fitted_at);
  j["training_window"] = {m.training_from_seq, m.training_to_seq};
  j["iterations"] = m.iterations;
  Json clusters = Json::array();
  for (size_t c = 0; c < m.k(); ++c) {
    Json item = Json::object();
    item["index"] = c;
    item["centroid"] = m.centroids[c];
    item["radius"] = m.radii[c];
    item["size"] = m.stats[c].size;
    item["good_rate"] = m.stats[c].good_rate ? Json(*m.stats[c].good_rate) : Json(nullptr);
    item["mean_confidence"] =
        m.stats[c].mean_confidence ? Json(*m.stats[c].mean_confidence) : Json(nullptr);
    clusters.push_back(std::move(item));
  }
  j["clusters"] = std::move(clusters);
  return j;
}

Json ToJson(const RoutingDecision& d) {
  Json j = Json::object();
  Json path = Json::array();
  for (const auto& a : d.serve_path) {
    Json item = Json::object();
    item["target"] = a.target ? Json(a.target->ToString()) : Json(nullptr);
    item["rule"] = std::string(ServeRuleName(a.rule));
    path.push_back(std::move(item));
  }
  j["serve_path"] = std::move(path);
  Json shadows = Json::array();
  for (const auto& s : d.shadow_targets) shadows.push_back(s.ToString());
  j["shadow_targets"] = std::move(shadows);
  j["reason"] = d.reason;
  if (d.threshold) j["threshold"] = *d.threshold;
  j["min_confidence"] = d.min_confidence;
  j["anomalous"] = d.anomalous;
  return j;
}

Json ToJson(const LogEntry& e) {
  Json j = Json::object();
  j["type"] = "call";
  j["seq"] = e.seq;
  j["service"] = e.service;
  j["request_id"] = e.request_id;
  j["timestamp"] = FormatTimestamp(e.timestamp);
  j["features"] = ToJson(e.features);
  j["decision_reason"] = e.decision_reason;
  if (e.threshold) j["threshold"] = *e.threshold;
  if (e.served_rule) {
    j["served_rule"] = std::string(ServeRuleName(*e.served_rule));
    j["tag"] = std::string(InvocationTag(*e.served_rule));
  }
  Json invocations = Json::array();
  for (const auto& inv : e.invocations) {
    Json item = Json::object();
    item["model"] = inv.model.ToString();
    item["rule"] = std::string(ServeRuleName(inv.rule));
    item["result"] = ToJson(inv.result);
    invocations.push_back(std::move(item));
  }
  j["invocations"] = std::move(invocations);
  Json shadow_targets = Json::array();
  for (const auto& s : e.shadow_targets) shadow_targets.push_back(s.ToString());
  j["shadow_targets"] = std::move(shadow_targets);
  if (e.served) j["served"] = ToJson(*e.served);
  if (e.error) j["error"] = *e.error;
  if (e.cluster) j["cluster"] = ToJson(*e.cluster);
  return j;
}

LogEntry LogEntryFromJson(const Json& j) {
  LogEntry e;
  e.seq = static_cast<uint64_t>(RequireInt(j, "seq"));
  e.service = RequireString(j, "service");
  e.request_id = RequireString(j, "request_id");
  e.timestamp = ParseTimestamp(RequireString(j, "timestamp"));
  e.features = FeatureVectorFromJson(Require(j, "features"));
  e.decision_reason = RequireString(j, "decision_reason");
  if (auto it = j.find("threshold"); it != j.end()) e.threshold = it->get<double>();
  if (auto rule = OptionalString(j, "served_rule")) e.served_rule = ParseServeRule(*rule);
  for (const auto& item : Require(j, "invocations")) {
    e.invocations.push_back({ModelId::Parse(RequireString(item, "model")),
                             ParseServeRule(RequireString(item, "rule")),
                             BackendResultFromJson(Require(item, "result"))});
  }
  for (const auto& s : Require(j, "shadow_targets")) {
    e.shadow_targets.push_back(ModelId::Parse(s.get<std::string>()));
  }
  if (auto it = j.find("served"); it != j.end()) e.served = ScoreResponseFromJson(*it);
  e.error = OptionalString(j, "error");
  if (auto it = j.find("cluster"); it != j.end()) {
    e.cluster = ClusterAssignment{static_cast<size_t>(RequireInt(*it, "index")),
                                  RequireNumber(*it, "distance"),
                                  RequireBool(*it, "anomalous")};
  }
  return e;
}

Json ToJson(const ShadowOutcome& s) {
  Json j = Json::object();
  j["model"] = s.model.ToString();
  j["result"] = ToJson(s.result);
  j["disagrees"] = s.disagrees;
  return j;
}

ShadowOutcome ShadowOutcomeFromJson(const Json& j) {
  return {ModelId::Parse(RequireString(j, "model")), BackendResultFromJson(Require(j, "result")),
          RequireBool(j, "disagrees")};
}

Json ToJson(const AuditEntry& a) {
  Json j = Json::object();
  j["type"] = "audit";
  j["seq"] = a.seq;
  j["at"] = FormatTimestamp(a.at);
  j["kind"] = std::string(AuditKindName(a.kind));
  j["subject"] = a.subject;
  j["actor"] = a.actor;
  j["cause"] = a.cause;
  j["before"] = a.before;
  j["after"] = a.after;
  return j;
}

AuditEntry AuditEntryFromJson(const Json& j) {
  AuditEntry a;
  a.seq = static_cast<uint64_t>(RequireInt(j, "seq"));
  a.at = ParseTimestamp(RequireString(j, "at"));
  std::string kind = RequireString(j, "kind");
  bool known = false;
  for (AuditKind k : {AuditKind::kStageChange, AuditKind::kThresholdChange,
                      AuditKind::kPolicyChange, AuditKind::kAdminAction}) {
    if (AuditKindName(k) == kind) {
      a.kind = k;
      known = true;
    }
  }
  if (!known) throw Error(ErrorCode::kSchemaError, "unknown audit kind '" + kind + "'");
  a.subject = RequireString(j, "subject");
  a.actor = RequireString(j, "actor");
  a.cause = RequireString(j, "cause");
  a.before = RequireString(j, "before");
  a.after = RequireString(j, "after");
  return a;
}

}  // namespace json

void CallLog::AttachDirectory(const std::filesystem::path& dir, uint64_t segment_size) {
  std::lock_guard lock(mu_);
  if (segment_size == 0) throw Error(ErrorCode::kInvalidConfig, "segment size must be positive");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kStorageFailure, "cannot create " + dir.string());
  dir_ = dir;
  segment_size_ = segment_size;
  auto segments = ListSegments(dir);
  for (const auto& path : segments) {
    std::ifstream in(path);
    std::string line;
    in_segment_ = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ApplyLine(line);
    }
  }
  if (!segments.empty()) {
    // Continue the last segment.
    std::ifstream in(segments.back());
    std::string line;
    in_segment_ = 0;
    while (std::getline(in, line)) {
      if (line.find("\"type\":\"call\"") != std::string::npos) ++in_segment_;
    }
    segment_.open(segments.back(), std::ios::app);
  }
}

void CallLog::ApplyLine(const std::string& line) {
  auto j = json::Parse(line);
  std::string type = json::RequireString(j, "type");
  if (type == "call") {
    LogEntry e = json::LogEntryFromJson(j);
    if (e.seq != entries_.size() + 1) {
      throw Error(ErrorCode::kStorageFailure, "log sequence gap at seq " + std::to_string(e.seq));
    }
    by_request_[e.request_id] = entries_.size();
    entries_.push_back(std::move(e));
  } else if (type == "feedback") {
    auto it = by_request_.find(json::RequireString(j, "request_id"));
    if (it == by_request_.end()) throw Error(ErrorCode::kStorageFailure, "orphan feedback record");
    entries_[it->second].feedback = json::FeedbackFromJson(json::Require(j, "feedback"));
  } else if (type == "shadow") {
    auto it = by_request_.find(json::RequireString(j, "request_id"));
    if (it == by_request_.end()) throw Error(ErrorCode::kStorageFailure, "orphan shadow record");
    entries_[it->second].shadows.push_back(json::ShadowOutcomeFromJson(json::Require(j, "outcome")));
  } else if (type == "audit") {
    audit_.push_back(json::AuditEntryFromJson(j));
  } else {
    throw Error(ErrorCode::kStorageFailure, "unknown log record type '" + type + "'");
  }
}

void CallLog::WriteLocked(const std::string& line, bool starts_entry) {
  if (dir_.empty()) return;
  if (!segment_.is_open() || (starts_entry && in_segment_ >= segment_size_)) {
    segment_.close();
    segment_.clear();
    segment_.open(dir_ / SegmentName(entries_.size() + (starts_entry ? 0 : 1)), std::ios::app);
    in_segment_ = 0;
  }
  if (starts_entry) ++in_segment_;
  segment_ << line << '\n';
  segment_.flush();
  if (!segment_) throw Error(ErrorCode::kStorageFailure, "log write failed under " + dir_.string());
}

uint64_t CallLog::Append(LogEntry entry) {
  std::lock_guard lock(mu_);
  entry.seq = entries_.size() + 1;
  entry.shadows.clear();
  entry.feedback.reset();
  by_request_[entry.request_id] = entries_.size();
  entries_.push_back(std::move(entry));
  WriteLocked(json::Dump(json::ToJson(entries_.back())), /*starts_entry=*/true);
  return entries_.back().seq;
}

JoinResult CallLog::JoinFeedback(const FeedbackRecord& feedback) {
  std::lock_guard lock(mu_);
  auto it = by_request_.find(feedback.request_id);
  if (it == by_request_.end()) {
    throw Error(ErrorCode::kUnknownRequest, "no logged request '" + feedback.request_id + "'");
  }
  LogEntry& entry = entries_[it->second];
  if (entry.feedback) return JoinResult::kDuplicate;
  entry.feedback = feedback;
  json::Json line = json::Json::object();
  line["type"] = "feedback";
  line["request_id"] = feedback.request_id;
  line["feedback"] = json::ToJson(feedback);
  WriteLocked(json::Dump(line), false);
  return JoinResult::kJoined;
}

void CallLog::RecordShadow(const std::string& request_id, const ShadowOutcome& outcome) {
  std::lock_guard lock(mu_);
  auto it = by_request_.find(request_id);
  if (it == by_request_.end()) {
    throw Error(ErrorCode::kUnknownRequest, "no logged request '" + request_id + "'");
  }
  entries_[it->second].shadows.push_back(outcome);
  json::Json line = json::Json::object();
  line["type"] = "shadow";
  line["request_id"] = request_id;
  line["outcome"] = json::ToJson(outcome);
  WriteLocked(json::Dump(line), false);
}

uint64_t CallLog::RecordAudit(AuditEntry entry) {
  std::lock_guard lock(mu_);
  entry.seq = audit_.size() + 1;
  audit_.push_back(std::move(entry));
  WriteLocked(json::Dump(json::ToJson(audit_.back())), false);
  return audit_.back().seq;
}

void CallLog::RecordStageChange(const StageChange& change) {
  AuditEntry entry;
  entry.at = change.at;
  entry.kind = AuditKind::kStageChange;
  entry.subject = change.id.ToString();
  entry.actor = "modelgate";
  entry.cause = change.cause;
  entry.before = "\"" + std::string(StageName(change.from)) + "\"";
  entry.after = "\"" + std::string(StageName(change.to)) + "\"";
  RecordAudit(std::move(entry));
}

std::optional<LogEntry> CallLog::FindByRequest(const std::string& request_id) const {
  std::lock_guard lock(mu_);
  auto it = by_request_.find(request_id);
  if (it == by_request_.end()) return std::nullopt;
  return entries_[it->second];
}

std::vector<LogEntry> CallLog::Entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<LogEntry> CallLog::Last(size_t n) const {
  std::lock_guard lock(mu_);
  size_t start = entries_.size() > n ? entries_.size() - n : 0;
  return {entries_.begin() + static_cast<ptrdiff_t>(start), entries_.end()};
}

std::vector<LogEntry> CallLog::First(size_t n) const {
  std::lock_guard lock(mu_);
  size_t end = std::min(n, entries_.size());
  return {entries_.begin(), entries_.begin() + static_cast<ptrdiff_t>(end)};
}

std::vector<LogEntry> CallLog::Range(uint64_t from_seq, uint64_t to_seq) const {
  std::lock_guard lock(mu_);
  std::vector<LogEntry> out;
  if (from_seq == 0) from_seq = 1;
  for (uint64_t s = from_seq; s <= to_seq && s <= entries_.size(); ++s) {
    out.push_back(entries_[s - 1]);
  }
  return out;
}

std::vector<AuditEntry> CallLog::Audit() const {
  std::lock_guard lock(mu_);
  return audit_;
}

size_t CallLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<LogEntry> CallLog::ReadEntries(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir)) {
    throw Error(ErrorCode::kStorageFailure, dir.string() + " does not exist");
  }
  CallLog log;
  for (const auto& path : ListSegments(dir)) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) log.ApplyLine(line);
    }
  }
  return log.entries_;
}

}  // namespace modelgate
