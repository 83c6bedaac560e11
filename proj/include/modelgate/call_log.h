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

#ifndef MODELGATE_CALL_LOG_H_
#define MODELGATE_CALL_LOG_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "modelgate/clustering.h"
#include "modelgate/protocol.h"
#include "modelgate/registry.h"
#include "modelgate/routing.h"

namespace modelgate {

struct Invocation {
  ModelId model;
  ServeRule rule = ServeRule::kChampion;
  BackendResult result;

  friend bool operator==(const Invocation&, const Invocation&) = default;
};

struct ShadowOutcome {
  ModelId model;
  BackendResult result;
  // Top-1 label differs from the served answer.
  bool disagrees = false;

  friend bool operator==(const ShadowOutcome&, const ShadowOutcome&) = default;
};

// One record per score request. The core fields are written once; shadow
// outcomes and feedback are joined later as keyed annotations.
struct LogEntry {
  uint64_t seq = 0;
  std::string service;
  std::string request_id;
  Timestamp timestamp{};
  FeatureVector features;
  std::string decision_reason;
  std::optional<double> threshold;
  std::optional<ServeRule> served_rule;  // nullopt when nothing was served
  std::vector<Invocation> invocations;
  std::vector<ModelId> shadow_targets;
  std::optional<ScoreResponse> served;
  std::optional<std::string> error;  // set when the request failed
  std::optional<ClusterAssignment> cluster;

  // Annotations.
  std::vector<ShadowOutcome> shadows;
  std::optional<FeedbackRecord> feedback;

  bool shadow_disagreement() const;
  // Top-1 label `model` produced for this request on the serve path or as a
  // shadow; nullopt when it was not invoked or failed.
  std::optional<std::string> TopLabelOf(const ModelId& model) const;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

enum class AuditKind { kStageChange, kThresholdChange, kPolicyChange, kAdminAction };

std::string_view AuditKindName(AuditKind kind);

struct AuditEntry {
  uint64_t seq = 0;
  Timestamp at{};
  AuditKind kind = AuditKind::kAdminAction;
  std::string subject;  // model id, service or endpoint path
  std::string actor;
  std::string cause;
  std::string before;  // JSON text
  std::string after;   // JSON text

  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

enum class JoinResult { kJoined, kDuplicate };

// Append-only call log with keyed annotations and an audit trail. With a
// directory attached, every record is also written as newline-delimited JSON
// into segment files `log-<first_seq>.jsonl`.
class CallLog : public StageAuditSink {
 public:
  CallLog() = default;
  CallLog(const CallLog&) = delete;
  CallLog& operator=(const CallLog&) = delete;

  // Replays existing segments under `dir`, then persists new records there.
  void AttachDirectory(const std::filesystem::path& dir, uint64_t segment_size = 10000);

  // Assigns and returns the next sequence number (1-based, gapless).
  uint64_t Append(LogEntry entry);

  // Throws kUnknownRequest. The first feedback per request wins.
  JoinResult JoinFeedback(const FeedbackRecord& feedback);
  void RecordShadow(const std::string& request_id, const ShadowOutcome& outcome);
  uint64_t RecordAudit(AuditEntry entry);
  void RecordStageChange(const StageChange& change) override;

  std::optional<LogEntry> FindByRequest(const std::string& request_id) const;
  std::vector<LogEntry> Entries() const;
  std::vector<LogEntry> Last(size_t n) const;
  std::vector<LogEntry> First(size_t n) const;
  // Entries with from <= seq <= to.
  std::vector<LogEntry> Range(uint64_t from_seq, uint64_t to_seq) const;
  std::vector<AuditEntry> Audit() const;
  size_t size() const;

  // Reconstructs a log from segment files without attaching to them.
  static std::vector<LogEntry> ReadEntries(const std::filesystem::path& dir);

 private:
  void ApplyLine(const std::string& line);
  void WriteLocked(const std::string& line, bool starts_entry);

  mutable std::mutex mu_;
  std::vector<LogEntry> entries_;
  std::unordered_map<std::string, size_t> by_request_;
  std::vector<AuditEntry> audit_;
  std::filesystem::path dir_;
  uint64_t segment_size_ = 10000;
  uint64_t in_segment_ = 0;
  std::ofstream segment_;
};

}  // namespace modelgate

#endif  // MODELGATE_CALL_LOG_H_
