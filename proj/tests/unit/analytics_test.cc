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

#include "modelgate/analytics.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "../test_util.h"
#include "modelgate/call_log.h"
#include "modelgate/error.h"

namespace modelgate {
namespace {

using testing::Id;
using testing::T0;

LogEntry Served(const std::string& rid, const ModelId& by, const std::string& label,
                double confidence, double latency, ServeRule rule = ServeRule::kChampion) {
  LogEntry e;
  e.service = by.service;
  e.request_id = rid;
  e.timestamp = T0();
  e.features = {{{"x", 1.0}}};
  e.served_rule = rule;
  ScoreResponse r;
  r.request_id = rid;
  r.served_by = by;
  r.predictions = testing::Answer(label, confidence);
  r.latency_ms = latency;
  e.served = r;
  e.invocations.push_back({by, rule, BackendResult::Ok(r, latency)});
  return e;
}

FeedbackRecord Feedback(const std::string& rid, Verdict v) {
  return {rid, v, std::nullopt, T0()};
}

TEST(CallLogTest, AppendAssignsGaplessSequence) {
  CallLog log;
  for (int i = 1; i <= 5; ++i) {
    EXPECT_EQ(log.Append(Served("r" + std::to_string(i), Id("s", 1), "a", 0.9, 1)),
              static_cast<uint64_t>(i));
  }
  EXPECT_EQ(log.size(), 5u);
  EXPECT_EQ(log.Range(2, 4).size(), 3u);
  EXPECT_EQ(log.Last(2).front().seq, 4u);
  EXPECT_EQ(log.First(2).back().seq, 2u);
}

TEST(CallLogTest, FirstFeedbackWins) {
  CallLog log;
  log.Append(Served("r1", Id("s", 1), "a", 0.9, 1));
  EXPECT_EQ(log.JoinFeedback(Feedback("r1", Verdict::kGood)), JoinResult::kJoined);
  EXPECT_EQ(log.JoinFeedback(Feedback("r1", Verdict::kBad)), JoinResult::kDuplicate);
  EXPECT_EQ(log.FindByRequest("r1")->feedback->verdict, Verdict::kGood);
  try {
    log.JoinFeedback(Feedback("nope", Verdict::kGood));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownRequest);
  }
}

TEST(CallLogTest, PersistsAndReplaysSegments) {
  auto dir = std::filesystem::temp_directory_path() / "mg_call_log_test";
  std::filesystem::remove_all(dir);
  std::vector<LogEntry> written;
  {
    CallLog log;
    log.AttachDirectory(dir, 3);
    for (int i = 1; i <= 7; ++i) log.Append(Served("r" + std::to_string(i), Id("s", 1), "a", 0.9, i));
    log.JoinFeedback(Feedback("r2", Verdict::kBad));
    log.RecordShadow("r3", {Id("s", 2), BackendResult::Timeout(600), false});
    log.RecordAudit({0, T0(), AuditKind::kPolicyChange, "policy", "ops", "tune", "{}", "{}"});
    written = log.Entries();
  }
  size_t segments = 0;
  for (auto& f : std::filesystem::directory_iterator(dir)) segments += f.path().extension() == ".jsonl";
  EXPECT_EQ(segments, 3u);
  EXPECT_EQ(CallLog::ReadEntries(dir), written);
  CallLog reopened;
  reopened.AttachDirectory(dir, 3);
  EXPECT_EQ(reopened.Entries(), written);
  EXPECT_EQ(reopened.Audit().size(), 1u);
  EXPECT_EQ(reopened.Append(Served("r8", Id("s", 1), "a", 0.9, 1)), 8u);
  std::filesystem::remove_all(dir);
}

TEST(UsageStatsTest, CountsHistogramsAndLatency) {
  std::vector<LogEntry> w;
  for (int i = 0; i < 10; ++i) {
    w.push_back(Served("r" + std::to_string(i), Id("s", 1), i < 7 ? "a" : "b", 0.65 + 0.03 * i,
                       10.0 * (i + 1)));
    w.back().seq = i + 1;
  }
  w.push_back(Served("x", Id("s", 2), "a", 0.9, 1));
  w[0].feedback = Feedback("r0", Verdict::kGood);
  w[1].feedback = Feedback("r1", Verdict::kBad);
  UsageStats s = ComputeUsageStats(w, Id("s", 1));
  EXPECT_EQ(s.call_count, 10u);
  EXPECT_EQ(s.label_distribution["a"], 7u);
  EXPECT_EQ(s.label_distribution["b"], 3u);
  uint64_t hist = 0;
  for (auto n : s.confidence_histogram) hist += n;
  EXPECT_EQ(hist, 10u);
  EXPECT_EQ(s.latency.p50, 50.0);
  EXPECT_EQ(s.latency.p95, 100.0);
  EXPECT_EQ(s.feedback_count, 2u);
  EXPECT_EQ(s.good_rate, 0.5);
  EXPECT_NEAR(s.mean_confidence, 0.65 + 0.03 * 4.5, 1e-12);
}

TEST(UsageStatsTest, EscalationsWithoutPredictionsAreSeparate) {
  LogEntry e = Served("r", Id("s", 1), "a", 0.9, 1, ServeRule::kEscalate);
  e.served->predictions.clear();
  e.served->status = ResponseStatus::kEscalated;
  std::vector<LogEntry> w{e};
  UsageStats s = ComputeUsageStats(w, Id("s", 1));
  EXPECT_EQ(s.call_count, 0u);
  EXPECT_EQ(s.escalated_without_predictions, 1u);
}

TEST(PercentileTest, NearestRank) {
  EXPECT_EQ(Percentile({}, 0.5), 0.0);
  EXPECT_EQ(Percentile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(Percentile({1, 2, 3, 4}, 0.5), 2.0);
  EXPECT_EQ(Percentile({1, 2, 3, 4}, 1.0), 4.0);
  EXPECT_EQ(Percentile({5}, 0.01), 5.0);
}

TEST(AgreementTest, ComparesServedAndShadowLabels) {
  std::vector<LogEntry> w;
  for (int i = 0; i < 4; ++i) {
    LogEntry e = Served("r" + std::to_string(i), Id("s", 1), "a", 0.9, 1);
    ScoreResponse sr;
    sr.request_id = e.request_id;
    sr.served_by = Id("s", 2);
    sr.predictions = testing::Answer(i == 0 ? "b" : "a", 0.8);
    e.shadow_targets = {Id("s", 2)};
    e.shadows.push_back({Id("s", 2), BackendResult::Ok(sr, 1), i == 0});
    w.push_back(e);
  }
  AgreementStats a = ComputeAgreement(w, Id("s", 1), Id("s", 2));
  EXPECT_EQ(a.common, 4u);
  EXPECT_EQ(a.agreed, 3u);
  EXPECT_EQ(a.rate, 0.75);
  EXPECT_FALSE(ComputeAgreement(w, Id("s", 1), Id("s", 9)).rate);
}

TEST(GoodRateTest, FiltersByModelAndRule) {
  std::vector<LogEntry> w;
  w.push_back(Served("r1", Id("s", 2), "a", 0.9, 1, ServeRule::kChallengerCanary));
  w.back().feedback = Feedback("r1", Verdict::kGood);
  w.push_back(Served("r2", Id("s", 2), "a", 0.9, 1, ServeRule::kChallengerThreshold));
  w.back().feedback = Feedback("r2", Verdict::kBad);
  w.push_back(Served("r3", Id("s", 2), "a", 0.9, 1, ServeRule::kChallengerCanary));
  EXPECT_EQ(ComputeGoodRate(w, Id("s", 2)).rate, 0.5);
  RateStats canary = ComputeGoodRate(w, Id("s", 2), ServeRule::kChallengerCanary);
  EXPECT_EQ(canary.count, 1u);
  EXPECT_EQ(canary.rate, 1.0);
  EXPECT_FALSE(ComputeGoodRate(w, Id("s", 1)).rate);
}

}  // namespace
}  // namespace modelgate
