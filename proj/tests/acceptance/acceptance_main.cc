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

// Acceptance gate. Runs every acceptance criterion at its stated tolerance
// and prints one line per criterion; exits non-zero if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "../generators.h"
#include "../oracles.h"
#include "../test_util.h"
#include "httplib.h"
#include "json_codec.h"
#include "modelgate/clustering.h"
#include "modelgate/drift.h"
#include "modelgate/error.h"
#include "modelgate/factbox.h"
#include "modelgate/harness/scenario.h"
#include "modelgate/harness/stub_model.h"
#include "modelgate/harness/traffic.h"
#include "modelgate/http_server.h"
#include "modelgate/modelgate.h"
#include "modelgate/policy.h"

namespace modelgate {
namespace {

using harness::RunMode;
using harness::Scenario;
using harness::ScenarioReport;
using harness::ScenarioRunner;
using json::Json;

struct Outcome {
  bool pass = false;
  std::string measured;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

Scenario Load(const std::string& name) {
  return harness::LoadScenario(std::string(MODELGATE_SCENARIO_DIR) + "/" + name + ".json");
}

std::string PredictionsBytes(const ScoreResponse& r) {
  Json arr = Json::array();
  for (const auto& p : r.predictions) arr.push_back(json::ToJson(p));
  return json::Dump(arr);
}

// 1. With every policy off the gateway is byte-transparent.
Outcome TransparentProxy() {
  harness::StubModelConfig config;
  config.model_id = ModelId::Parse("model-id:proxy.v1");
  config.truth.weights = {1.0, -1.0};
  config.accuracy = 0.85;
  auto stub = std::make_shared<harness::StubModel>(config, 2024);
  BackendServer backend(stub);
  backend.Start();

  ModelgateOptions o;
  o.gateway.service = "proxy";
  o.policy = PolicyConfig::Disabled();
  o.admin_token = "";
  Modelgate gate(o);
  VersionNotification n = testing::Notification(config.model_id);
  n.endpoint = backend.url();
  gate.Deploy(n);
  GatewayServer server(gate.gateway(), &gate.admin());
  server.Start();

  harness::TrafficConfig t;
  t.features = {"x0", "x1"};
  t.mixture = {{1.0, {0.0, 0.0}, {4.0, 4.0}}};
  t.total = 1000;
  t.seed = 99;
  httplib::Client via_gateway(server.url());
  httplib::Client direct(backend.url());
  int equal = 0;
  for (const ScoreRequest& req : harness::GenerateTraffic(t)) {
    std::string body = Encode(req);
    auto g = via_gateway.Post("/v1/score", body, "application/json");
    auto d = direct.Post("/v1/score", body, "application/json");
    if (!g || !d || g->status != 200 || d->status != 200) continue;
    equal += PredictionsBytes(DecodeScoreResponse(g->body)) ==
             PredictionsBytes(DecodeScoreResponse(d->body));
  }
  server.Stop();
  backend.Stop();
  return {equal == 1000, Fmt("%d/1000 byte-equal", equal)};
}

// Breaks one invariant of `m`; the variant is chosen by `rng`.
Message Violate(const Message& m, std::mt19937_64& rng) {
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  if (auto* q = std::get_if<ScoreRequest>(&m)) {
    ScoreRequest r = *q;
    switch (pick(4)) {
      case 0: r.request_id.clear(); break;
      case 1: r.features.features.push_back({"dup", 1.0}); r.features.features.push_back({"dup", 2.0}); break;
      case 2: r.features.features.push_back({"nan", std::nan("")}); break;
      default: r.features.features.push_back({"", 1.0}); break;
    }
    return r;
  }
  if (auto* s = std::get_if<ScoreResponse>(&m)) {
    ScoreResponse r = *s;
    switch (pick(6)) {
      case 0: r.request_id.clear(); break;
      case 1:
        if (r.predictions.empty()) r.predictions.push_back({"a", 0.5});
        r.predictions[rng() % r.predictions.size()].uncertainty = pick(2) ? 1.5 : -0.25;
        break;
      case 2: r.predictions = {{"a", 0.6}, {"b", 0.1}}; break;
      case 3:
        r.status = ResponseStatus::kOk;
        r.escalation_id.reset();
        r.predictions.clear();
        break;
      case 4:
        r.status = ResponseStatus::kEscalated;
        r.escalation_id.reset();
        break;
      default: r.latency_ms = -1.0; break;
    }
    return r;
  }
  if (auto* f = std::get_if<FeedbackRecord>(&m)) {
    FeedbackRecord r = *f;
    r.request_id.clear();
    return r;
  }
  VersionNotification r = std::get<VersionNotification>(m);
  switch (pick(4)) {
    case 0: r.based_on = ModelId{r.model_id.service + "x", 1}; break;
    case 1: r.based_on = ModelId{r.model_id.service, r.model_id.version}; break;
    case 2: r.related_to = "svc"; break;
    default: r.endpoint.clear(); break;
  }
  return r;
}

// 2. decode(encode(m)) == m, and every violation is rejected both ways.
Outcome ProtocolRoundTrip() {
  testing::MessageGen gen(20180616);
  std::mt19937_64 rng(77);
  const int kMessages = 10000;
  int identity = 0;
  int rejected_encode = 0;
  int rejected_decode = 0;
  for (int i = 0; i < kMessages; ++i) {
    Message m = gen.Any();
    std::string bytes = EncodeMessage(m);
    Message back = DecodeMessage(KindOf(m), bytes);
    identity += back == m && EncodeMessage(back) == bytes;

    Message bad = Violate(m, rng);
    try {
      EncodeMessage(bad);
    } catch (const Error& e) {
      rejected_encode += e.code() == ErrorCode::kInvariantViolation;
    }
    std::string raw = json::Dump(std::visit([](const auto& x) { return json::ToJson(x); }, bad));
    try {
      DecodeMessage(KindOf(bad), raw);
    } catch (const Error& e) {
      rejected_decode += e.code() == ErrorCode::kInvariantViolation ||
                         e.code() == ErrorCode::kSchemaError;
    }
  }
  bool pass = identity == kMessages && rejected_encode == kMessages && rejected_decode == kMessages;
  return {pass, Fmt("identity %d/%d, violations rejected encode %d decode %d of %d", identity,
                    kMessages, rejected_encode, rejected_decode, kMessages)};
}

// 3. Deterministic canary assignment.
Outcome Canary() {
  uint64_t count = 0;
  for (uint64_t i = 1; i <= 10000; ++i) {
    count += CanaryAssign(oracle::RequestId(i), 0.1, "s1");
  }
  uint64_t expected = oracle::CanaryCount("s1", 0.1, 10000);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int monotone = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string id = oracle::RequestId(1 + rng() % 10000);
    double f = unit(rng);
    double g = f + (1.0 - f) * unit(rng);
    monotone += !CanaryAssign(id, f, "s1") || CanaryAssign(id, g, "s1");
  }
  bool pass = count >= 910 && count <= 1090 && count == expected && monotone == 1000;
  return {pass, Fmt("count %llu, oracle %llu, monotone %d/1000",
                    static_cast<unsigned long long>(count),
                    static_cast<unsigned long long>(expected), monotone)};
}

struct ThresholdRun {
  uint64_t challenger_served = 0;
  uint64_t below_tau = 0;
  uint64_t exceptions = 0;  // fallback or escalation
  uint64_t served = 0;
};

ThresholdRun RunThreshold(std::optional<double> tau) {
  Scenario s = Load("threshold");
  if (tau) s.policy.threshold_schedule = {*tau};
  ScenarioRunner runner(s);
  runner.Run();
  const ModelId challenger = ModelId::Parse("model-id:fraud-check.v2");
  ThresholdRun out;
  for (const LogEntry& e : runner.gate().log().Entries()) {
    if (!e.served) continue;
    ++out.served;
    if (e.served_rule == ServeRule::kFallback || e.served_rule == ServeRule::kEscalate) {
      ++out.exceptions;
    }
    if (e.served->served_by != challenger) continue;
    ++out.challenger_served;
    double need = e.threshold.value_or(s.policy.threshold_schedule.front());
    if (e.served_rule != ServeRule::kChallengerThreshold || !e.threshold ||
        e.served->Top()->confidence() < need ||
        e.served->Top()->confidence() < s.policy.threshold_schedule.front()) {
      ++out.below_tau;
    }
  }
  return out;
}

// 4. Thresholded serving honours tau.
Outcome Threshold() {
  ThresholdRun normal = RunThreshold(std::nullopt);
  ThresholdRun all = RunThreshold(0.0);
  ThresholdRun none = RunThreshold(1.0);
  bool pass = normal.challenger_served > 0 && normal.below_tau == 0 &&
              none.challenger_served == 0 &&
              all.challenger_served + all.exceptions == all.served && all.served > 0;
  return {pass, Fmt("tau=0.8: %llu challenger-served, %llu below tau; tau=1: %llu; "
                    "tau=0: %llu/%llu (%llu exceptions)",
                    static_cast<unsigned long long>(normal.challenger_served),
                    static_cast<unsigned long long>(normal.below_tau),
                    static_cast<unsigned long long>(none.challenger_served),
                    static_cast<unsigned long long>(all.challenger_served),
                    static_cast<unsigned long long>(all.served),
                    static_cast<unsigned long long>(all.exceptions))};
}

// 5. PSI value, identity and alarm timing.
Outcome Drift() {
  std::vector<double> r{0.5, 0.5}, c{0.9, 0.1};
  double psi = Psi(r, c);
  double oracle_psi = oracle::TwoBinPsi();

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<FeatureVector> window;
  for (int i = 0; i < 1000; ++i) window.push_back({{{"a", n(rng)}, {"b", n(rng)}}});
  double identical = ComputeDrift(window, window).aggregate;

  ScenarioReport report = ScenarioRunner(Load("drift_mid_rollout")).Run();
  const uint64_t shift_window = 5;  // the shift applies from request 5001
  std::optional<uint64_t> first_alarm;
  bool early_alarm = false;
  for (const auto& w : report.windows) {
    if (!w.drift || !w.drift->alarm) continue;
    if (w.index <= shift_window) early_alarm = true;
    if (!first_alarm) first_alarm = w.index;
  }
  bool pass = std::abs(psi - 0.8789) <= 1e-3 && std::abs(psi - oracle_psi) <= 1e-12 &&
              identical == 0.0 && !early_alarm && first_alarm &&
              *first_alarm - shift_window <= 2;
  return {pass, Fmt("psi %.6f (oracle %.6f), identical %.3g, first alarm window %llu "
                    "(shift after window %llu), early alarm %s",
                    psi, oracle_psi, identical,
                    static_cast<unsigned long long>(first_alarm.value_or(0)),
                    static_cast<unsigned long long>(shift_window),
                    early_alarm ? "yes" : "no")};
}

// 6. Clustering recovers planted means.
Outcome Clustering() {
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<FeatureVector> points;
  std::vector<oracle::Point> raw;
  for (double centre : {0.0, 10.0}) {
    for (int i = 0; i < 100; ++i) {
      double x = centre + n(rng), y = centre + n(rng);
      points.push_back({{{"x", x}, {"y", y}}});
      raw.push_back({x, y});
    }
  }
  ClusterModel model = FitClusters(points, 2, 42);
  const std::vector<std::vector<double>> planted{{0.0, 0.0}, {10.0, 10.0}};
  double worst = 0.0;
  for (const auto& p : planted) {
    double best = INFINITY;
    for (const auto& c : model.centroids) best = std::min(best, std::hypot(c[0] - p[0], c[1] - p[1]));
    worst = std::max(worst, best);
  }
  bool monotone = true;
  for (size_t i = 1; i < model.objective_trace.size(); ++i) {
    monotone &= model.objective_trace[i] <= model.objective_trace[i - 1];
  }
  std::vector<oracle::Point> centroids;
  for (const auto& c : model.centroids) centroids.push_back({c[0], c[1]});
  double wcss = oracle::Wcss(raw, centroids);
  bool objective_matches =
      !model.objective_trace.empty() &&
      std::abs(model.objective_trace.back() - wcss) <= 1e-9 * std::max(1.0, wcss);

  ClusterModel one = FitClusters(points, 1, 42);
  double mx = 0.0, my = 0.0;
  for (const auto& p : raw) {
    mx += p.x;
    my += p.y;
  }
  mx /= raw.size();
  my /= raw.size();
  double k1 = std::max(std::abs(one.centroids[0][0] - mx), std::abs(one.centroids[0][1] - my));
  bool pass = worst <= 0.3 && monotone && objective_matches && k1 <= 1e-9;
  return {pass, Fmt("max centroid error %.4f, objective non-increasing over %zu steps %s, "
                    "final objective vs oracle %s, k=1 error %.2g",
                    worst, model.objective_trace.size(), monotone ? "yes" : "no",
                    objective_matches ? "equal" : "differs", k1)};
}

std::map<std::string, std::vector<std::string>> StageSequences(const ScenarioReport& report) {
  std::map<std::string, std::vector<std::string>> seq;
  for (const auto& e : report.timeline) {
    if (e.kind != AuditKind::kStageChange) continue;
    auto& s = seq[e.subject];
    if (s.empty()) s.push_back(Json::parse(e.before).get<std::string>());
    s.push_back(Json::parse(e.after).get<std::string>());
  }
  return seq;
}

bool LegalSequence(const std::vector<std::string>& s) {
  static const std::vector<std::string> kOrder = {"registered", "shadow", "canary", "thresholded",
                                                  "full"};
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == "retired") return i + 1 == s.size() && i > 0;
    if (i >= kOrder.size() || s[i] != kOrder[i]) return false;
  }
  return true;
}

// Index of the first request served after `model` entered `stage`.
std::optional<uint64_t> EnteredAt(const ScenarioReport& report, const std::string& model,
                                  const std::string& stage) {
  for (const auto& e : report.timeline) {
    if (e.kind == AuditKind::kStageChange && e.subject == model &&
        Json::parse(e.after).get<std::string>() == stage) {
      return e.request_index;
    }
  }
  return std::nullopt;
}

bool FullyPopulated(const FactBox& b) {
  return b.based_on && !b.related_to.empty() && b.deployed_at && b.deployment_id &&
         b.canary.verdict != "n/a" && b.canary.pass_rate && b.canary.previous_pass_rate &&
         b.shadow.reference && b.shadow.agreement && b.test_id && b.signed_off;
}

// 7. Stage sequences, rollback speed and the retired challenger's fact box.
Outcome RolloutStateMachine() {
  const std::string challenger = "model-id:fraud-check.v2";
  std::string measured;
  bool pass = true;
  for (const std::string name : {"good_challenger", "bad_challenger", "drift_mid_rollout"}) {
    ScenarioRunner runner(Load(name));
    ScenarioReport report = runner.Run();
    auto seqs = StageSequences(report);
    // The bootstrap champion is deployed straight to full; every notified
    // version walks the state machine.
    bool legal = seqs.count(challenger) > 0;
    for (const auto& stub : runner.scenario().stubs) {
      if (stub.based_on) legal &= LegalSequence(seqs[stub.model.model_id.ToString()]);
    }
    pass &= legal;
    std::string path;
    for (const auto& st : seqs[challenger]) path += (path.empty() ? "" : ">") + st;
    measured += name + ": " + path + (legal ? "" : " ILLEGAL") + "; ";
    if (name != "bad_challenger") continue;

    auto canary = EnteredAt(report, challenger, "canary");
    auto retired = EnteredAt(report, challenger, "retired");
    uint64_t feedbacks = 0;
    if (canary && retired) {
      const ModelId id = ModelId::Parse(challenger);
      for (const LogEntry& e : runner.gate().log().Range(*canary + 1, *retired)) {
        feedbacks += e.feedback && e.served && e.served->served_by == id;
      }
    }
    bool fast = canary && retired && feedbacks <= 200;
    bool populated = FullyPopulated(report.fact_boxes.at(ModelId::Parse(challenger)));
    pass &= fast && populated;
    measured += Fmt("rollback after %llu challenger feedbacks, fact box %s; ",
                    static_cast<unsigned long long>(feedbacks),
                    populated ? "populated" : "INCOMPLETE");
  }
  measured.resize(measured.size() - 2);
  return {pass, measured};
}

// 8. Staged rollout limits the bad model's exposure.
Outcome Exposure() {
  Scenario s = Load("bad_challenger");
  const ModelId bad = ModelId::Parse("model-id:fraud-check.v2");
  double staged = ScenarioRunner(s).Run().Share(bad);
  harness::RunOptions direct;
  direct.mode = RunMode::kDirectCutover;
  double cutover = ScenarioRunner(s, direct).Run().Share(bad);
  double bound = s.policy.canary_fraction + 0.05;
  return {staged < bound && cutover == 1.0,
          Fmt("staged share %.4f (bound %.2f), direct cutover %.4f", staged, bound, cutover)};
}

// 9. The worked fact box.
Outcome WorkedFactBox() {
  ScenarioRunner runner(Load("worked_factbox"));
  ScenarioReport report = runner.Run();
  const FactBox& b = report.fact_boxes.at(ModelId::Parse("model-id:123-345-678.v221"));
  auto near = [](const std::optional<double>& v, double want) {
    return v && std::abs(*v - want) <= 1e-12;
  };
  bool fields = b.id.ToString() == "model-id:123-345-678.v221" && b.based_on &&
                b.based_on->ToString() == "model-id:123-345-678.v220" &&
                b.related_to == "service-id:123-345" && b.deployed_at &&
                FormatDate(*b.deployed_at) == "2018-06-16" &&
                b.deployment_id == "depl-id:2332-233-544-22" && b.canary.verdict == "passed" &&
                near(b.canary.pass_rate, 0.995) && near(b.canary.previous_pass_rate, 0.996) &&
                b.shadow.reference &&
                b.shadow.reference->ToString() == "model-id:123-345-678.v220" &&
                near(b.shadow.agreement, 0.9999) && b.test_id == "test-id:223-345-678.v2" &&
                b.signed_off == "report-1234857";
  std::string text = RenderFactBoxText(b);
  int found = 0;
  const std::vector<std::string> lines = {
      "ID: model-id:123-345-678.v221",
      "Deployed in production: 2018-06-16 depl-id:2332-233-544-22",
      "Based on: model-id:123-345-678.v220",
      "Canary-test-results: passed (99.5%, previous 99.6%)",
      "Related to: service-id:123-345",
      "Shadow: model-id:123-345-678.v220 (agreement 99.99%)",
      "ID: test-id:223-345-678.v2",
      "Signed-off: report-1234857"};
  for (const auto& l : lines) found += text.find(l) != std::string::npos;
  size_t prov = text.find("Provenance:");
  size_t usage = text.find("Usage:");
  size_t testing = text.find("Testing:");
  bool layout = prov != std::string::npos && usage != std::string::npos &&
                testing != std::string::npos &&
                text.find('\n', prov) == text.find('\n', usage) && testing > usage;
  bool pass = fields && layout && found == static_cast<int>(lines.size());
  return {pass, Fmt("fields %s, %d/%zu lines, two-column layout %s", fields ? "match" : "DIFFER",
                    found, lines.size(), layout ? "ok" : "BROKEN")};
}

// 10. Concurrent duplicate resolutions are exactly-once end to end.
Outcome Escalations() {
  testing::ManualClock clock;
  PolicyConfig p;
  p.exception.min_confidence = 0.95;
  p.exception.on_exception = {ExceptionAction::kEscalate};
  Modelgate gate(testing::InlineOptions("svc", clock, p));
  auto backend = std::make_shared<testing::FixedBackend>(testing::Id("svc", 1),
                                                         testing::Answer("yes", 0.7));
  gate.backends().Register("model-id:svc.v1", backend);
  gate.Deploy(testing::Notification(testing::Id("svc", 1)));
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) {
    ScoreOutcome out = gate.gateway().HandleScore(testing::Request("r" + std::to_string(i)));
    if (out.response.escalation_id) ids.push_back(*out.response.escalation_id);
  }
  std::atomic<int> ok{0}, already{0}, other{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&, t] {
      for (size_t i = 0; i < ids.size(); ++i) {
        try {
          gate.escalations().Resolve(ids[(i + t * 13) % ids.size()], "yes",
                                     "worker-" + std::to_string(t));
          ++ok;
        } catch (const Error& e) {
          (e.code() == ErrorCode::kAlreadyResolved ? already : other)++;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  uint64_t joined = 0;
  for (const LogEntry& e : gate.log().Entries()) joined += e.feedback.has_value();
  // Every escalation comes from a low-confidence answer, not a failure.
  bool pass = backend->calls() == 100 && ids.size() == 100 && ok == 100 && already == 700 && other == 0 && joined == 100 &&
              gate.escalations().feedback_emitted() == 100;
  return {pass, Fmt("%zu escalations, %d resolved, %d AlreadyResolved, %d other errors, "
                    "%llu feedback records emitted, %llu joined",
                    ids.size(), ok.load(), already.load(), other.load(),
                    static_cast<unsigned long long>(gate.escalations().feedback_emitted()),
                    static_cast<unsigned long long>(joined))};
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace modelgate

int main() {
  using modelgate::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "transparent proxy", 10, modelgate::TransparentProxy},
      {2, "protocol round trip", 30, modelgate::ProtocolRoundTrip},
      {3, "canary assignment", 5, modelgate::Canary},
      {4, "thresholded serving", 20, modelgate::Threshold},
      {5, "drift detection", 10, modelgate::Drift},
      {6, "clustering", 5, modelgate::Clustering},
      {7, "rollout state machine", 60, modelgate::RolloutStateMachine},
      {8, "bad model exposure", 60, modelgate::Exposure},
      {9, "fact box", 30, modelgate::WorkedFactBox},
      {10, "escalation exactly-once", 10, modelgate::Escalations},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    modelgate::Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = out.pass && seconds < c.limit_seconds;
    failed += !pass;
    std::printf("[%s] AC%d %s: %s (%.2f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", c.number,
                c.name, out.measured.c_str(), seconds, c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
