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

#include "modelgate/harness/scenario.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "json_codec.h"
#include "modelgate/error.h"
#include "view_json.h"

namespace modelgate::harness {

namespace {

using json::Json;

[[noreturn]] void ConfigError(const std::string& detail) {
  throw Error(ErrorCode::kConfigError, detail);
}

std::vector<double> Numbers(const Json& j, const char* what) {
  if (!j.is_array()) ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) ConfigError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

uint64_t Count(const Json& obj, const char* key, uint64_t fallback) {
  int64_t v = json::IntOr(obj, key, static_cast<int64_t>(fallback));
  if (v < 0) ConfigError(std::string(key) + " must be non-negative");
  return static_cast<uint64_t>(v);
}

BetaParams BetaFrom(const Json& j, const char* what) {
  std::vector<double> v = Numbers(j, what);
  if (v.size() != 2) ConfigError(std::string(what) + " must be [alpha, beta]");
  return {v[0], v[1]};
}

TruthRule TruthFrom(const Json& j) {
  json::ExpectObject(j, "truth");
  TruthRule t;
  t.weights = Numbers(json::Require(j, "weights"), "truth.weights");
  t.bias = json::NumberOr(j, "bias", 0.0);
  if (auto p = json::OptionalString(j, "positive")) t.positive = *p;
  if (auto n = json::OptionalString(j, "negative")) t.negative = *n;
  return t;
}

StubSpec StubFrom(const Json& j, const Scenario& sc) {
  json::ExpectObject(j, "stub");
  StubSpec s;
  StubModelConfig& m = s.model;
  m.model_id = ModelId::Parse(json::RequireString(j, "model_id"));
  if (m.model_id.service != sc.service) {
    ConfigError(m.model_id.ToString() + " does not belong to service " + sc.service);
  }
  m.truth = sc.truth;
  m.accuracy = json::NumberOr(j, "accuracy", 1.0);
  if (auto it = j.find("confidence"); it != j.end()) {
    json::ExpectObject(*it, "confidence");
    if (it->contains("fixed")) m.fixed_confidence = json::RequireNumber(*it, "fixed");
    if (it->contains("correct")) m.correct_confidence = BetaFrom((*it)["correct"], "confidence.correct");
    if (it->contains("wrong")) m.wrong_confidence = BetaFrom((*it)["wrong"], "confidence.wrong");
  }
  if (auto it = j.find("latency_ms"); it != j.end()) {
    json::ExpectObject(*it, "latency_ms");
    m.latency_mean_ms = json::NumberOr(*it, "mean", m.latency_mean_ms);
    m.latency_jitter_ms = json::NumberOr(*it, "jitter", m.latency_jitter_ms);
  }
  m.failure_rate = json::NumberOr(j, "failure_rate", 0.0);
  if (auto it = j.find("forced_errors"); it != j.end()) {
    if (!it->is_array()) ConfigError("forced_errors must be an array");
    for (const auto& e : *it) {
      json::ExpectObject(e, "forced error");
      m.forced_errors.push_back({Count(e, "from", 0), Count(e, "to", 0), Count(e, "every", 1)});
    }
  }
  m.Validate();
  if (auto b = json::OptionalString(j, "based_on")) s.based_on = ModelId::Parse(*b);
  s.related_to = json::OptionalString(j, "related_to").value_or("service-id:" + sc.service);
  s.test_id = json::OptionalString(j, "test_id");
  s.signed_off = json::OptionalString(j, "signed_off");
  s.deployment_id = json::OptionalString(j, "deployment_id");
  return s;
}

TrafficConfig TrafficFrom(const Json& j) {
  json::ExpectObject(j, "traffic");
  TrafficConfig t;
  const Json& features = json::Require(j, "features");
  if (!features.is_array()) ConfigError("traffic.features must be an array");
  for (const auto& f : features) {
    if (!f.is_string()) ConfigError("traffic.features must be strings");
    t.features.push_back(f.get<std::string>());
  }
  const Json& mixture = json::Require(j, "mixture");
  if (!mixture.is_array()) ConfigError("traffic.mixture must be an array");
  for (const auto& c : mixture) {
    json::ExpectObject(c, "mixture component");
    MixtureComponent mc;
    mc.weight = json::NumberOr(c, "weight", 1.0);
    mc.mean = Numbers(json::Require(c, "mean"), "mixture.mean");
    mc.variance = c.contains("variance") ? Numbers(c["variance"], "mixture.variance")
                                         : std::vector<double>(mc.mean.size(), 1.0);
    t.mixture.push_back(std::move(mc));
  }
  if (auto it = j.find("drift"); it != j.end()) {
    if (!it->is_array()) ConfigError("traffic.drift must be an array");
    for (const auto& d : *it) {
      json::ExpectObject(d, "drift step");
      t.drift.push_back({Count(d, "at", 0), Numbers(json::Require(d, "shift"), "drift.shift")});
    }
  }
  t.total = Count(j, "total", 0);
  t.interval = std::chrono::milliseconds(Count(j, "interval_ms", 1000));
  t.start = ParseTimestamp(json::OptionalString(j, "start").value_or("2018-06-16T00:00:00Z"));
  return t;
}

ScriptEvent EventFrom(const Json& j) {
  json::ExpectObject(j, "script event");
  ScriptEvent e;
  e.at = Count(j, "at", 0);
  std::string action = json::RequireString(j, "action");
  if (action == "champion") {
    e.action = ScriptAction::kChampion;
  } else if (action == "notify") {
    e.action = ScriptAction::kNotify;
  } else if (action == "promote") {
    e.action = ScriptAction::kPromote;
  } else if (action == "rollback") {
    e.action = ScriptAction::kRollback;
  } else if (action == "set_policy") {
    e.action = ScriptAction::kSetPolicy;
    const Json& patch = json::Require(j, "policy");
    json::ExpectObject(patch, "policy");
    e.policy_patch = json::Dump(patch);
  } else if (action == "resolve_escalations") {
    e.action = ScriptAction::kResolveEscalations;
  } else {
    ConfigError("unknown script action '" + action + "'");
  }
  if (e.action == ScriptAction::kChampion || e.action == ScriptAction::kNotify) {
    e.model = ModelId::Parse(json::RequireString(j, "model"));
  }
  e.cause = json::OptionalString(j, "cause").value_or("scripted " + action);
  return e;
}

Json TagCounts(const std::map<std::string, uint64_t>& counts) {
  Json j = Json::object();
  for (const char* tag : {"4a", "4b", "4c", "4d"}) {
    auto it = counts.find(tag);
    j[tag] = it == counts.end() ? 0 : it->second;
  }
  return j;
}

}  // namespace

std::string_view RunModeName(RunMode mode) {
  return mode == RunMode::kStaged ? "staged" : "direct_cutover";
}

Scenario ParseScenario(std::string_view text) {
  Scenario sc;
  try {
    Json j = json::Parse(text);
    json::ExpectObject(j, "scenario");
    sc.name = json::OptionalString(j, "name").value_or("scenario");
    sc.seed = Count(j, "seed", 1);
    sc.service = json::RequireString(j, "service");
    std::string mode = json::OptionalString(j, "mode").value_or("staged");
    if (mode == "staged") {
      sc.mode = RunMode::kStaged;
    } else if (mode == "direct_cutover") {
      sc.mode = RunMode::kDirectCutover;
    } else {
      ConfigError("mode must be 'staged' or 'direct_cutover'");
    }
    sc.truth = TruthFrom(json::Require(j, "truth"));
    sc.traffic = TrafficFrom(json::Require(j, "traffic"));
    if (sc.truth.weights.size() != sc.traffic.features.size()) {
      ConfigError("truth.weights must match the feature list");
    }
    const Json& stubs = json::Require(j, "stubs");
    if (!stubs.is_array() || stubs.empty()) ConfigError("stubs must be a non-empty array");
    for (const auto& s : stubs) sc.stubs.push_back(StubFrom(s, sc));
    if (auto it = j.find("policy"); it != j.end()) {
      try {
        sc.policy = PolicyFromJson(json::Dump(*it));
      } catch (const Error& e) {
        ConfigError("policy: " + e.detail());
      }
    }
    if (auto it = j.find("feedback"); it != j.end()) {
      sc.feedback_probability = json::NumberOr(*it, "probability", sc.feedback_probability);
    }
    if (!(sc.feedback_probability >= 0.0 && sc.feedback_probability <= 1.0)) {
      ConfigError("feedback.probability must be in [0,1]");
    }
    if (auto it = j.find("clusters"); it != j.end()) {
      json::ExpectObject(*it, "clusters");
      sc.cluster_k = Count(*it, "k", sc.cluster_k);
      sc.cluster_fit_after = Count(*it, "fit_after", sc.cluster_fit_after);
      sc.cluster_refit_every = Count(*it, "refit_every", sc.cluster_refit_every);
      if (sc.cluster_k == 0) ConfigError("clusters.k must be >= 1");
    }
    if (auto it = j.find("report"); it != j.end()) {
      sc.window = Count(*it, "window", sc.window);
    }
    if (sc.window == 0) ConfigError("report.window must be >= 1");
    if (auto it = j.find("worker"); it != j.end()) {
      std::string mode = json::OptionalString(*it, "mode").value_or("none");
      if (mode == "none") {
        sc.worker = WorkerMode::kNone;
      } else if (mode == "immediate") {
        sc.worker = WorkerMode::kImmediate;
      } else {
        ConfigError("worker.mode must be 'none' or 'immediate'");
      }
    }
    if (auto it = j.find("script"); it != j.end()) {
      if (!it->is_array()) ConfigError("script must be an array");
      for (const auto& e : *it) sc.script.push_back(EventFrom(e));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    ConfigError(e.detail());
  }
  std::stable_sort(sc.script.begin(), sc.script.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) { return a.at < b.at; });
  for (const auto& e : sc.script) {
    if (e.model && std::none_of(sc.stubs.begin(), sc.stubs.end(), [&](const StubSpec& s) {
          return s.model.model_id == *e.model;
        })) {
      ConfigError("script refers to unknown stub " + e.model->ToString());
    }
  }
  return sc;
}

Scenario LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ConfigError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseScenario(buf.str());
}

uint64_t ScenarioReport::ServedBy(const ModelId& model) const {
  auto it = served.find(model);
  if (it == served.end()) return 0;
  uint64_t n = 0;
  for (const auto& [tag, count] : it->second) n += count;
  return n;
}

uint64_t ScenarioReport::ServedTotal() const {
  uint64_t n = 0;
  for (const auto& [model, tags] : served) n += ServedBy(model);
  return n;
}

double ScenarioReport::Share(const ModelId& model) const {
  return total == 0 ? 0.0 : static_cast<double>(ServedBy(model)) / static_cast<double>(total);
}

std::string ScenarioReport::ToJson() const {
  Json j = Json::object();
  j["name"] = name;
  j["seed"] = seed;
  j["mode"] = std::string(RunModeName(mode));
  j["total"] = total;
  Json served_json = Json::object();
  Json share = Json::object();
  for (const auto& [model, tags] : served) {
    served_json[model.ToString()] = TagCounts(tags);
    share[model.ToString()] = Share(model);
  }
  j["served"] = std::move(served_json);
  j["errors"] = errors;
  j["served_share"] = std::move(share);
  j["feedback_joined"] = feedback_joined;
  Json esc = Json::object();
  esc["total"] = escalations;
  esc["resolved"] = escalations_resolved;
  esc["pending"] = escalations_pending;
  j["escalations"] = std::move(esc);

  Json windows_json = Json::array();
  for (const auto& w : windows) {
    Json wj = Json::object();
    wj["index"] = w.index;
    wj["from"] = w.from;
    wj["to"] = w.to;
    Json s = Json::object(), g = Json::object(), f = Json::object(), st = Json::object();
    for (const auto& [m, n] : w.served) s[m.ToString()] = n;
    for (const auto& [m, r] : w.good) {
      g[m.ToString()] = r.rate ? Json(*r.rate) : Json(nullptr);
      f[m.ToString()] = r.count;
    }
    for (const auto& [m, stage] : w.stages) st[m.ToString()] = std::string(StageName(stage));
    wj["served"] = std::move(s);
    wj["good_rate"] = std::move(g);
    wj["feedback"] = std::move(f);
    wj["drift"] = w.drift ? json::ToJson(*w.drift) : Json(nullptr);
    wj["stages"] = std::move(st);
    windows_json.push_back(std::move(wj));
  }
  j["windows"] = std::move(windows_json);

  Json timeline_json = Json::array();
  for (const auto& t : timeline) {
    Json tj = Json::object();
    tj["request_index"] = t.request_index;
    tj["kind"] = std::string(AuditKindName(t.kind));
    tj["subject"] = t.subject;
    tj["before"] = json::Parse(t.before);
    tj["after"] = json::Parse(t.after);
    tj["cause"] = t.cause;
    timeline_json.push_back(std::move(tj));
  }
  j["timeline"] = std::move(timeline_json);

  Json boxes = Json::object();
  Json texts = Json::object();
  for (const auto& [model, box] : fact_boxes) {
    boxes[model.ToString()] = json::Parse(FactBoxToJson(box));
    texts[model.ToString()] = RenderFactBoxText(box);
  }
  j["fact_boxes"] = std::move(boxes);
  j["fact_box_text"] = std::move(texts);
  return json::Dump(j);
}

ScenarioRunner::ScenarioRunner(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)), options_(std::move(options)) {
  seed_ = options_.seed.value_or(scenario_.seed);
  if (options_.mode) scenario_.mode = *options_.mode;
  PolicyConfig policy = scenario_.policy;
  if (scenario_.mode == RunMode::kDirectCutover) policy.require_staging = false;
  scenario_.traffic.seed = DeriveSeed(seed_, "traffic");
  now_ = scenario_.traffic.start;

  ModelgateOptions mo;
  mo.gateway.service = scenario_.service;
  mo.gateway.shadow_mode = ShadowMode::kInline;
  mo.gateway.cluster_k = scenario_.cluster_k;
  mo.gateway.cluster_fit_after = scenario_.cluster_fit_after;
  mo.gateway.cluster_refit_every = scenario_.cluster_refit_every;
  mo.gateway.cluster_seed = DeriveSeed(seed_, "clusters");
  mo.policy = policy;
  mo.data_dir = options_.log_dir;
  mo.admin_token = "";
  mo.clock = [this] { return now_; };
  gate_ = std::make_unique<Modelgate>(std::move(mo));
  base_seq_ = gate_->log().size();
  audit_seen_ = gate_->log().Audit().size();

  uint64_t stub_seed = DeriveSeed(seed_, "stubs");
  for (const auto& spec : scenario_.stubs) {
    const ModelId& id = spec.model.model_id;
    if (!stubs_.emplace(id, spec).second) ConfigError("duplicate stub " + id.ToString());
    auto model = std::make_shared<StubModel>(spec.model, stub_seed);
    models_[id] = model;
    gate_->backends().Register(id.ToString(), model);
  }
}

ScenarioRunner::~ScenarioRunner() = default;

void ScenarioRunner::ApplyEvent(const ScriptEvent& event) {
  const std::string& service = scenario_.service;
  switch (event.action) {
    case ScriptAction::kChampion:
    case ScriptAction::kNotify: {
      const StubSpec& spec = stubs_.at(*event.model);
      VersionNotification n;
      n.model_id = spec.model.model_id;
      n.based_on = spec.based_on;
      n.related_to = spec.related_to;
      n.endpoint = "inproc://" + n.model_id.ToString();
      n.test_id = spec.test_id;
      n.signed_off = spec.signed_off;
      RegistrationOptions ro;
      ro.deployment_id = spec.deployment_id;
      if (event.action == ScriptAction::kChampion) {
        gate_->Deploy(n, ro);
      } else {
        gate_->gateway().HandleNotify(n, ro);
      }
      break;
    }
    case ScriptAction::kPromote:
      gate_->rollouts().Promote(service, event.cause);
      break;
    case ScriptAction::kRollback:
      gate_->rollouts().Rollback(service, event.cause);
      break;
    case ScriptAction::kSetPolicy: {
      std::string before = PolicyToJson(gate_->rollouts().policy());
      Json merged = json::Parse(before);
      merged.merge_patch(json::Parse(event.policy_patch));
      gate_->rollouts().SetPolicy(PolicyFromJson(json::Dump(merged)));
      AuditEntry entry;
      entry.at = now_;
      entry.kind = AuditKind::kPolicyChange;
      entry.subject = "policy";
      entry.actor = "scenario";
      entry.cause = event.cause;
      entry.before = before;
      entry.after = PolicyToJson(gate_->rollouts().policy());
      gate_->log().RecordAudit(std::move(entry));
      break;
    }
    case ScriptAction::kResolveEscalations:
      ResolvePending();
      break;
  }
}

void ScenarioRunner::ResolvePending() {
  for (const auto& e : gate_->escalations().List(EscalationState::kPending)) {
    gate_->escalations().Resolve(e.id, scenario_.truth.Label(e.request.features), "worker-1");
  }
}

void ScenarioRunner::CollectTimeline(uint64_t request_index) {
  std::vector<AuditEntry> audit = gate_->log().Audit();
  for (; audit_seen_ < audit.size(); ++audit_seen_) {
    const AuditEntry& a = audit[audit_seen_];
    if (a.kind != AuditKind::kStageChange && a.kind != AuditKind::kThresholdChange) continue;
    report_.timeline.push_back({request_index, a.kind, a.subject, a.before, a.after, a.cause});
  }
}

void ScenarioRunner::CloseWindow(uint64_t from, uint64_t to) {
  std::vector<LogEntry> entries = gate_->log().Range(base_seq_ + from, base_seq_ + to);
  WindowReport w;
  w.index = report_.windows.size() + 1;
  w.from = from;
  w.to = to;
  for (const auto& e : entries) {
    if (e.served) ++w.served[e.served->served_by];
  }
  for (const auto& [id, model] : models_) {
    RateStats r = ComputeGoodRate(entries, id);
    if (r.count > 0) w.good[id] = r;
    if (auto record = gate_->registry().Find(id)) w.stages[id] = record->stage;
  }
  std::vector<FeatureVector> features = FeaturesOf(entries);
  if (first_window_.empty()) first_window_ = features;
  if (!features.empty()) {
    auto clusters = gate_->gateway().clusters();
    DriftOptions opts;
    opts.anomaly_factor = gate_->rollouts().policy().cluster_gate.anomaly_factor;
    w.drift = ComputeDrift(first_window_, features, clusters.get(), opts);
  }
  report_.windows.push_back(std::move(w));
}

ScenarioReport ScenarioRunner::Finish() {
  report_.name = scenario_.name;
  report_.seed = seed_;
  report_.mode = scenario_.mode;
  report_.feedback_joined = 0;
  for (const auto& e : gate_->log().Range(base_seq_ + 1, base_seq_ + report_.total)) {
    if (e.feedback) ++report_.feedback_joined;
  }
  auto escalations = gate_->escalations().List();
  report_.escalations = escalations.size();
  report_.escalations_pending = gate_->escalations().pending_count();
  report_.escalations_resolved = report_.escalations - report_.escalations_pending;
  report_.fact_boxes.clear();
  for (const auto& [id, spec] : stubs_) {
    if (gate_->registry().Find(id)) {
      report_.fact_boxes[id] = BuildFactBox(gate_->registry(), gate_->log(), id);
    }
  }
  return report_;
}

ScenarioReport ScenarioRunner::Run() {
  if (ran_) throw Error(ErrorCode::kScenarioAborted, "a runner executes once");
  ran_ = true;
  report_ = {};
  const uint64_t total = scenario_.traffic.total;
  size_t next_event = 0;
  auto apply_due = [&](uint64_t served) {
    while (next_event < scenario_.script.size() && scenario_.script[next_event].at <= served) {
      ApplyEvent(scenario_.script[next_event++]);
      CollectTimeline(served);
    }
  };

  try {
    apply_due(0);
    TrafficGenerator traffic(scenario_.traffic);
    std::mt19937_64 feedback_rng(DeriveSeed(seed_, "feedback"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    uint64_t window_start = 1;
    for (uint64_t i = 1; i <= total; ++i) {
      ScoreRequest req = *traffic.Next();
      now_ = req.timestamp;
      double feedback_draw = unit(feedback_rng);
      report_.total = i;
      try {
        ScoreOutcome out = gate_->gateway().HandleScore(req);
        ++report_.served[out.response.served_by][std::string(InvocationTag(out.rule))];
        if (out.response.status == ResponseStatus::kEscalated) {
          if (scenario_.worker == WorkerMode::kImmediate) {
            gate_->escalations().Resolve(*out.response.escalation_id,
                                         scenario_.truth.Label(req.features), "worker-1");
          }
        } else if (feedback_draw < scenario_.feedback_probability) {
          FeedbackRecord fb;
          fb.request_id = req.request_id;
          fb.timestamp = now_;
          fb.true_label = scenario_.truth.Label(req.features);
          fb.verdict = out.response.predictions.front().result == *fb.true_label ? Verdict::kGood
                                                                                  : Verdict::kBad;
          gate_->gateway().HandleFeedback(fb);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoChampion && e.code() != ErrorCode::kAllBackendsFailed) throw;
        ++report_.errors;
      }
      CollectTimeline(i);
      apply_due(i);
      if (i - window_start + 1 == scenario_.window) {
        CloseWindow(window_start, i);
        window_start = i + 1;
      }
    }
    if (window_start <= total) CloseWindow(window_start, total);
    // Events scheduled past the end of the traffic still run.
    apply_due(UINT64_MAX);
  } catch (const Error& e) {
    std::string partial = Finish().ToJson();
    throw ScenarioAborted(e.what(), std::move(partial));
  }
  return Finish();
}

std::string RunScenarioJson(std::string_view scenario_json, std::optional<uint64_t> seed) {
  RunOptions options;
  options.seed = seed;
  ScenarioRunner runner(ParseScenario(scenario_json), options);
  return runner.Run().ToJson();
}

}  // namespace modelgate::harness
