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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "../oracles.h"
#include "json_codec.h"
#include "modelgate/harness/scenario.h"
#include "modelgate/harness/stub_model.h"
#include "modelgate/harness/traffic.h"

namespace modelgate::harness {
namespace {

using json::Json;

std::string ScenarioText(const std::string& name) {
  std::ifstream in(std::string(MODELGATE_SCENARIO_DIR) + "/" + name + ".json");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario Small(const std::string& name, uint64_t total) {
  Scenario s = ParseScenario(ScenarioText(name));
  s.traffic.total = total;
  return s;
}

FeatureVector Features(double a, double b) { return {{{"x0", a}, {"x1", b}}}; }

TEST(StubModelTest, AccuracyMatchesConfiguredProbability) {
  StubModelConfig config;
  config.model_id = ModelId::Parse("model-id:svc.v1");
  config.truth.weights = {1.0, -1.0};
  config.accuracy = 0.8;
  StubModel stub(config, 11);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const uint64_t kN = 20000;
  uint64_t correct = 0;
  for (uint64_t i = 1; i <= kN; ++i) {
    ScoreRequest r{RequestIdFor(i), {}, Features(n(rng), n(rng))};
    StubAnswer a = stub.Answer(r);
    bool matches = a.predictions.front().result == config.truth.Label(r.features);
    EXPECT_EQ(matches, a.correct);
    correct += a.correct;
  }
  EXPECT_LT(std::abs(oracle::BinomialZ(correct, kN, 0.8)), 4.0) << correct;
}

TEST(StubModelTest, EmittedLabelIsTopOneAndAnswersAreOrderIndependent) {
  StubModelConfig config;
  config.model_id = ModelId::Parse("model-id:svc.v1");
  config.truth.weights = {1.0, 1.0};
  config.accuracy = 0.7;
  StubModel a(config, 5);
  StubModel b(config, 5);
  for (uint64_t i = 1; i <= 500; ++i) {
    ScoreRequest r{RequestIdFor(i), {}, Features(0.1 * i, -0.05 * i)};
    StubAnswer x = a.Answer(r);
    ASSERT_EQ(x.predictions.size(), 2u);
    EXPECT_GE(x.predictions[0].confidence(), 0.5);
    EXPECT_LT(x.predictions[1].confidence(), x.predictions[0].confidence());
    EXPECT_LE(x.predictions[0].confidence(), 1.0);
    ScoreRequest back{RequestIdFor(501 - i), {}, Features(0.1 * (501 - i), -0.05 * (501 - i))};
    b.Answer(back);
  }
  for (uint64_t i = 1; i <= 500; ++i) {
    ScoreRequest r{RequestIdFor(i), {}, Features(0.1 * i, -0.05 * i)};
    EXPECT_EQ(a.Answer(r).predictions, b.Answer(r).predictions);
  }
}

TEST(StubModelTest, ForcedErrorsAndNestedMistakes) {
  StubModelConfig good;
  good.model_id = ModelId::Parse("model-id:svc.v1");
  good.truth.weights = {1.0};
  good.accuracy = 0.95;
  good.forced_errors = {{10, 20, 5}};
  StubModelConfig worse = good;
  worse.model_id = ModelId::Parse("model-id:svc.v2");
  worse.accuracy = 0.6;
  worse.forced_errors.clear();
  StubModel g(good, 9);
  StubModel w(worse, 9);
  for (uint64_t i = 1; i <= 2000; ++i) {
    ScoreRequest r{RequestIdFor(i), {}, {{{"x0", 1.0}}}};
    StubAnswer ga = g.Answer(r);
    if (i == 14 || i == 19) EXPECT_FALSE(ga.correct) << i;
    // Shared draws: the more accurate stub is right whenever the other is,
    // outside forced errors.
    if (!good.forced_errors[0].Hits(i) && w.Answer(r).correct) EXPECT_TRUE(ga.correct) << i;
  }
  EXPECT_TRUE(ErrorSchedule({10, 20, 5}).Hits(14));
  EXPECT_FALSE(ErrorSchedule({10, 20, 5}).Hits(15));
  EXPECT_FALSE(ErrorSchedule({10, 20, 5}).Hits(24));
}

TEST(StubModelTest, ValidatesConfig) {
  StubModelConfig c;
  c.accuracy = 1.5;
  EXPECT_THROW(StubModel(c, 1), Error);
  c.accuracy = 0.5;
  c.correct_confidence.alpha = 0.0;
  EXPECT_THROW(StubModel(c, 1), Error);
}

TEST(TrafficTest, MixtureMeansAndDriftShift) {
  TrafficConfig t;
  t.features = {"a", "b"};
  t.mixture = {{1.0, {1.0, -2.0}, {4.0, 0.25}}};
  t.drift = {{5000, {5.0, 5.0}}};
  t.total = 10000;
  t.seed = 42;
  std::vector<ScoreRequest> reqs = GenerateTraffic(t);
  ASSERT_EQ(reqs.size(), 10000u);
  EXPECT_EQ(reqs.front().request_id, "req-000001");
  EXPECT_EQ(reqs.back().request_id, "req-010000");
  double before[2] = {0, 0}, after[2] = {0, 0};
  for (size_t i = 0; i < reqs.size(); ++i) {
    for (int d = 0; d < 2; ++d) (i < 5000 ? before : after)[d] += reqs[i].features.features[d].value;
  }
  // Standard error is at most 2/sqrt(5000) ~ 0.028.
  EXPECT_NEAR(before[0] / 5000, 1.0, 0.12);
  EXPECT_NEAR(before[1] / 5000, -2.0, 0.03);
  EXPECT_NEAR(after[0] / 5000, 6.0, 0.12);
  EXPECT_NEAR(after[1] / 5000, 3.0, 0.03);
  EXPECT_EQ(reqs[1].timestamp - reqs[0].timestamp, std::chrono::milliseconds(1000));
  EXPECT_EQ(GenerateTraffic(t)[777].features, reqs[777].features);
}

TEST(TrafficTest, RejectsBadMixture) {
  TrafficConfig t;
  t.features = {"a"};
  t.mixture = {{0.5, {0.0}, {1.0}}};
  EXPECT_THROW(t.Validate(), Error);
  t.mixture = {{1.0, {0.0, 1.0}, {1.0}}};
  EXPECT_THROW(t.Validate(), Error);
}

TEST(ScenarioParseTest, RejectsBrokenDocuments) {
  auto rejects = [](const std::string& text) {
    try {
      ParseScenario(text);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kConfigError;
    }
    return false;
  };
  EXPECT_TRUE(rejects("{not json"));
  EXPECT_TRUE(rejects("[]"));
  Json good = Json::parse(ScenarioText("good_challenger"));
  Json j = good;
  j["script"].push_back({{"at", 1}, {"action", "notify"}, {"model", "model-id:fraud-check.v9"}});
  EXPECT_TRUE(rejects(j.dump()));
  j = good;
  j["script"][0]["action"] = "explode";
  EXPECT_TRUE(rejects(j.dump()));
  j = good;
  j["policy"]["canary_fraction"] = 1.5;
  EXPECT_TRUE(rejects(j.dump()));
  j = good;
  j.erase("service");
  EXPECT_TRUE(rejects(j.dump()));
  EXPECT_FALSE(rejects(good.dump()));
}

TEST(ScenarioRunTest, SameSeedGivesIdenticalReports) {
  std::string a = ScenarioRunner(Small("good_challenger", 3000)).Run().ToJson();
  std::string b = ScenarioRunner(Small("good_challenger", 3000)).Run().ToJson();
  EXPECT_EQ(a, b);
  RunOptions other;
  other.seed = 8;
  std::string c = ScenarioRunner(Small("good_challenger", 3000), other).Run().ToJson();
  EXPECT_NE(a, c);
  Json r = Json::parse(a);
  EXPECT_EQ(r["total"], 3000);
  EXPECT_EQ(r["windows"].size(), 3u);
}

// Every scenario's stage sequence per model walks the state machine.
TEST(ScenarioRunTest, StageSequencesFollowTheStateMachine) {
  const std::vector<std::string> order = {"registered", "shadow", "canary", "thresholded", "full"};
  for (const std::string name : {"good_challenger", "bad_challenger", "drift_mid_rollout"}) {
    ScenarioRunner runner(ParseScenario(ScenarioText(name)));
    ScenarioReport report = runner.Run();
    std::map<std::string, std::vector<std::string>> seq;
    for (const auto& e : report.timeline) {
      if (e.kind != AuditKind::kStageChange) continue;
      std::string after = Json::parse(e.after);
      std::string before = Json::parse(e.before);
      auto& s = seq[e.subject];
      if (s.empty()) s.push_back(before);
      EXPECT_EQ(s.back(), before) << name << " " << e.subject;
      s.push_back(after);
    }
    const std::string challenger = "model-id:fraud-check.v2";
    ASSERT_TRUE(seq.count(challenger)) << name;
    const auto& s = seq[challenger];
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == "retired") {
        EXPECT_EQ(i + 1, s.size()) << name;
        break;
      }
      ASSERT_LT(i, order.size());
      EXPECT_EQ(s[i], order[i]) << name << " step " << i;
    }
    uint64_t audited = 0;
    for (const auto& e : runner.gate().log().Audit()) audited += e.kind == AuditKind::kStageChange;
    EXPECT_EQ(audited, runner.gate().registry().stage_change_count()) << name;
  }
}

TEST(ScenarioRunTest, DirectCutoverGivesTheChallengerEverything) {
  RunOptions o;
  o.mode = RunMode::kDirectCutover;
  ScenarioReport r = ScenarioRunner(Small("bad_challenger", 2000), o).Run();
  EXPECT_DOUBLE_EQ(r.Share(ModelId::Parse("model-id:fraud-check.v2")), 1.0);
  EXPECT_EQ(r.mode, RunMode::kDirectCutover);
}

TEST(ScenarioRunTest, IllegalScriptedActionAbortsWithPartialReport) {
  Scenario s = Small("good_challenger", 2000);
  s.script.push_back({500, ScriptAction::kRollback, std::nullopt, "", "oops"});
  s.script.push_back({600, ScriptAction::kRollback, std::nullopt, "", "again"});
  try {
    ScenarioRunner(s).Run();
    FAIL() << "expected abort";
  } catch (const ScenarioAborted& e) {
    Json partial = Json::parse(e.partial_report());
    EXPECT_EQ(partial["total"], 600);
    EXPECT_EQ(e.code(), ErrorCode::kScenarioAborted);
  }
}

TEST(ScenarioRunTest, LogDirectoryPersistsAndReplays) {
  auto dir = std::filesystem::temp_directory_path() / "modelgate_harness_test";
  std::filesystem::remove_all(dir);
  RunOptions o;
  o.log_dir = dir;
  ScenarioReport r = ScenarioRunner(Small("good_challenger", 1500), o).Run();
  std::vector<LogEntry> entries = CallLog::ReadEntries(dir / "log");
  ASSERT_EQ(entries.size(), 1500u);
  for (size_t i = 0; i < entries.size(); ++i) EXPECT_EQ(entries[i].seq, i + 1);
  uint64_t joined = 0;
  for (const auto& e : entries) joined += e.feedback.has_value();
  EXPECT_EQ(joined, r.feedback_joined);
  EXPECT_TRUE(std::filesystem::exists(dir / "registry.jsonl"));
  std::filesystem::remove_all(dir);
}

TEST(ScenarioRunTest, RunScenarioJsonMatchesRunner) {
  Scenario s = Small("threshold", 500);
  Json doc = Json::parse(ScenarioText("threshold"));
  doc["traffic"]["total"] = 500;
  EXPECT_EQ(RunScenarioJson(doc.dump()), ScenarioRunner(s).Run().ToJson());
}

}  // namespace
}  // namespace modelgate::harness
