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

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modelgate/backend.h"
#include "modelgate/clustering.h"
#include "modelgate/drift.h"
#include "modelgate/error.h"
#include "modelgate/factbox.h"
#include "modelgate/harness/scenario.h"
#include "modelgate/harness/stub_model.h"
#include "modelgate/modelgate.h"
#include "modelgate/policy.h"
#include "modelgate/protocol.h"

namespace py = pybind11;

namespace modelgate {
namespace {

PyObject* g_error = nullptr;

FeatureVector ToFeatures(const py::dict& d) {
  FeatureVector v;
  for (auto item : d) {
    v.features.push_back({py::cast<std::string>(item.first), py::cast<double>(item.second)});
  }
  return v;
}

std::vector<FeatureVector> ToWindow(const std::vector<py::dict>& rows) {
  std::vector<FeatureVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(ToFeatures(r));
  return out;
}

std::vector<FeatureVector> ToPoints(const std::vector<std::vector<double>>& points) {
  std::vector<FeatureVector> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    FeatureVector v;
    for (size_t i = 0; i < p.size(); ++i) v.features.push_back({"x" + std::to_string(i), p[i]});
    out.push_back(std::move(v));
  }
  return out;
}

py::dict DriftToDict(const DriftReport& r) {
  py::dict per_feature;
  for (const auto& [name, psi] : r.per_feature) per_feature[py::str(name)] = psi;
  py::dict d;
  d["per_feature"] = per_feature;
  d["aggregate"] = r.aggregate;
  d["anomalous_rate"] = r.anomalous_rate;
  d["alarm"] = r.alarm;
  return d;
}

// One service deployment in process. Backends are Python callables taking
// and returning protocol JSON text.
class PyGateway {
 public:
  PyGateway(const std::string& service, const std::optional<std::string>& policy_json,
            const std::string& admin_token)
      : service_(service) {
    ModelgateOptions o;
    o.gateway.service = service;
    o.gateway.shadow_mode = ShadowMode::kInline;
    if (policy_json) o.policy = PolicyFromJson(*policy_json);
    o.admin_token = admin_token;
    gate_ = std::make_unique<Modelgate>(std::move(o));
  }

  void AddBackend(const std::string& endpoint, py::function score) {
    auto fn = std::make_shared<py::function>(std::move(score));
    auto backend = std::make_shared<FunctionBackend>([fn](const ScoreRequest& request) {
      py::gil_scoped_acquire gil;
      std::string out = py::cast<std::string>((*fn)(Encode(request)));
      return DecodeScoreResponse(out);
    });
    constexpr std::string_view kScheme = "inproc://";
    std::string name = endpoint.starts_with(kScheme) ? endpoint.substr(kScheme.size()) : endpoint;
    gate_->backends().Register(name, backend);
  }

  std::string Deploy(const std::string& notification) {
    return gate_->Deploy(DecodeNotification(notification)).id.ToString();
  }

  std::string Notify(const std::string& notification) {
    NotifyAck ack = gate_->gateway().HandleNotify(DecodeNotification(notification));
    return std::string(StageName(ack.record.stage));
  }

  std::string Score(const std::string& request) {
    ScoreRequest r = DecodeScoreRequest(request);
    py::gil_scoped_release release;
    return Encode(gate_->gateway().HandleScore(r).response);
  }

  bool Feedback(const std::string& feedback) {
    FeedbackAck ack = gate_->gateway().HandleFeedback(DecodeFeedback(feedback));
    return ack.join == JoinResult::kJoined;
  }

  std::string Promote(const std::string& cause) {
    return std::string(TransitionName(gate_->rollouts().Promote(service_, cause)));
  }

  void Rollback(const std::string& cause) {
    gate_->rollouts().Rollback(service_, cause);
  }

  std::string Stage(const std::string& model_id) {
    return std::string(StageName(gate_->registry().Get(ModelId::Parse(model_id)).stage));
  }

  std::string FactBoxJson(const std::string& model_id) {
    return FactBoxToJson(BuildFactBox(gate_->registry(), gate_->log(), ModelId::Parse(model_id)));
  }

  std::string FactBoxText(const std::string& model_id) {
    return RenderFactBoxText(
        BuildFactBox(gate_->registry(), gate_->log(), ModelId::Parse(model_id)));
  }

  std::pair<int, std::string> Admin(const std::string& method, const std::string& path,
                                    const std::string& body, const std::string& token) {
    HttpCall call;
    call.method = method;
    call.path = path;
    call.body = body;
    if (!token.empty()) call.headers["authorization"] = "Bearer " + token;
    HttpReply reply = gate_->admin().Handle(call);
    return {reply.status, reply.body};
  }

  size_t LogSize() { return gate_->log().size(); }

 private:
  std::string service_;
  std::unique_ptr<Modelgate> gate_;
};

}  // namespace
}  // namespace modelgate

PYBIND11_MODULE(_core, m) {
  using namespace modelgate;
  m.doc() = "Bindings for the modelgate core library.";

  g_error = PyErr_NewException("modelgate._core.Error", PyExc_ValueError, nullptr);
  m.attr("Error") = py::handle(g_error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object value = py::handle(g_error)(e.what());
      value.attr("code") = std::string(ErrorCodeName(e.code()));
      value.attr("detail") = e.detail();
      PyErr_SetObject(g_error, value.ptr());
    }
  });

  m.def("parse_model_id", [](const std::string& text) {
    ModelId id = ModelId::Parse(text);
    return std::make_pair(id.service, id.version);
  });
  m.def("format_model_id", [](const std::string& service, uint32_t version) {
    return ModelId{service, version}.ToString();
  });
  m.def("canonicalize",
        [](const std::string& kind, const std::string& text) {
          MessageKind k = ParseMessageKind(kind);
          return EncodeMessage(DecodeMessage(k, text));
        },
        py::arg("kind"), py::arg("text"),
        "Decodes a protocol message and re-encodes it canonically.");

  m.def("fnv1a64", &Fnv1a64, py::arg("salt"), py::arg("text"));
  m.def("canary_assign", &CanaryAssign, py::arg("request_id"), py::arg("fraction"),
        py::arg("salt") = "modelgate");
  m.def("apply_threshold",
        [](const std::string& response, double tau) {
          return ApplyThreshold(DecodeScoreResponse(response), tau) ==
                 ThresholdOutcome::kUseChallenger;
        },
        py::arg("response"), py::arg("tau"),
        "True when the challenger's answer clears tau.");
  m.def("validate_policy", [](const std::string& text) { return PolicyToJson(PolicyFromJson(text)); });
  m.def("default_policy", [] { return PolicyToJson(PolicyConfig{}); });

  m.def("psi",
        [](const std::vector<double>& reference, const std::vector<double>& current,
           double epsilon) { return Psi(reference, current, epsilon); },
        py::arg("reference"), py::arg("current"), py::arg("epsilon") = 1e-4);
  m.def("drift",
        [](const std::vector<py::dict>& reference, const std::vector<py::dict>& current,
           double alarm_threshold) {
          DriftOptions o;
          o.alarm_threshold = alarm_threshold;
          auto ref = ToWindow(reference);
          auto cur = ToWindow(current);
          return DriftToDict(ComputeDrift(ref, cur, nullptr, o));
        },
        py::arg("reference"), py::arg("current"), py::arg("alarm_threshold") = 0.2);

  py::class_<ClusterModel>(m, "Clusters")
      .def_property_readonly("centroids", [](const ClusterModel& c) { return c.centroids; })
      .def_property_readonly("radii", [](const ClusterModel& c) { return c.radii; })
      .def_property_readonly("objective_trace",
                             [](const ClusterModel& c) { return c.objective_trace; })
      .def("assign", [](const ClusterModel& c, const std::vector<double>& point) {
        ClusterAssignment a = Assign(ToPoints({point}).front(), c);
        return py::make_tuple(a.index, a.distance, a.anomalous);
      });
  m.def("fit_clusters",
        [](const std::vector<std::vector<double>>& points, size_t k, uint64_t seed) {
          auto vectors = ToPoints(points);
          return FitClusters(vectors, k, seed);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 1);

  m.def("synth_score",
        [](const py::dict& features, const std::vector<double>& weights, double accuracy,
           uint64_t seed, const std::string& positive, const std::string& negative) {
          harness::StubModelConfig c;
          c.model_id = ModelId{"stub", 1};
          c.truth.weights = weights;
          c.truth.positive = positive;
          c.truth.negative = negative;
          c.accuracy = accuracy;
          c.Validate();
          std::mt19937_64 rng(seed);
          harness::StubAnswer a = harness::SynthScore(c, ToFeatures(features), rng);
          std::vector<std::pair<std::string, double>> preds;
          for (const auto& p : a.predictions) preds.emplace_back(p.result, p.uncertainty);
          return py::make_tuple(preds, a.correct);
        },
        py::arg("features"), py::arg("weights"), py::arg("accuracy"), py::arg("seed") = 1,
        py::arg("positive") = "pos", py::arg("negative") = "neg");

  m.def("run_scenario",
        [](const std::string& text, std::optional<uint64_t> seed) {
          py::gil_scoped_release release;
          return harness::RunScenarioJson(text, seed);
        },
        py::arg("scenario"), py::arg("seed") = py::none(),
        "Runs a scenario document and returns the report as JSON text.");

  py::class_<PyGateway>(m, "Gateway")
      .def(py::init<const std::string&, const std::optional<std::string>&, const std::string&>(),
           py::arg("service"), py::arg("policy") = py::none(), py::arg("admin_token") = "")
      .def("add_backend", &PyGateway::AddBackend, py::arg("endpoint"), py::arg("score"))
      .def("deploy", &PyGateway::Deploy)
      .def("notify", &PyGateway::Notify)
      .def("score", &PyGateway::Score)
      .def("feedback", &PyGateway::Feedback)
      .def("promote", &PyGateway::Promote, py::arg("cause") = "python")
      .def("rollback", &PyGateway::Rollback, py::arg("cause") = "python")
      .def("stage", &PyGateway::Stage)
      .def("fact_box", &PyGateway::FactBoxJson)
      .def("fact_box_text", &PyGateway::FactBoxText)
      .def("admin", &PyGateway::Admin, py::arg("method"), py::arg("path"), py::arg("body") = "",
           py::arg("token") = "")
      .def_property_readonly("log_size", &PyGateway::LogSize);
}
