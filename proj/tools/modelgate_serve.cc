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

// HTTP front ends.
//
//   modelgate-serve gateway --config gateway.json
//   modelgate-serve stub --model-id model-id:svc.v1 --weights 1,-1 --port 9001
//
// Gateway config:
//   {"service": "svc", "host": "127.0.0.1", "port": 8080, "data_dir": "/var/lib/mg",
//    "deadline_ms": 500, "policy": {...},
//    "champion": {"model_id": "model-id:svc.v1", "endpoint": "http://127.0.0.1:9001", ...}}
// The champion notification is only used when the registry has none yet.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json_codec.h"
#include "modelgate/harness/stub_model.h"
#include "modelgate/http_server.h"
#include "modelgate/modelgate.h"

namespace mg = modelgate;

namespace {

int ServeGateway(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot read " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    mg::json::Json cfg = mg::json::Parse(buf.str());
    mg::json::ExpectObject(cfg, "config");
    mg::ModelgateOptions options;
    options.gateway.service = mg::json::RequireString(cfg, "service");
    options.gateway.deadline =
        std::chrono::milliseconds(mg::json::IntOr(cfg, "deadline_ms", mg::kDefaultDeadline.count()));
    options.gateway.cluster_fit_after = mg::json::IntOr(cfg, "cluster_fit_after", 0);
    if (auto it = cfg.find("policy"); it != cfg.end()) {
      options.policy = mg::PolicyFromJson(mg::json::Dump(*it));
    }
    if (auto dir = mg::json::OptionalString(cfg, "data_dir")) options.data_dir = *dir;
    mg::Modelgate gate(std::move(options));

    if (auto it = cfg.find("champion"); it != cfg.end()) {
      mg::VersionNotification n = mg::json::NotificationFromJson(*it);
      if (!gate.registry().HasChampion(n.model_id.service)) {
        gate.Deploy(n);
        std::cerr << "deployed " << n.model_id << " as champion\n";
      }
    }
    mg::GatewayServer server(gate.gateway(), &gate.admin());
    std::string host = mg::json::OptionalString(cfg, "host").value_or("127.0.0.1");
    int port = static_cast<int>(mg::json::IntOr(cfg, "port", 8080));
    std::cerr << "modelgate listening on " << host << ":" << port << "\n";
    return server.Run(host, port) ? 0 : 1;
  } catch (const mg::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int ServeStub(const std::string& model_id, const std::vector<double>& weights, double accuracy,
              uint64_t seed, const std::string& host, int port, int delay_ms) {
  try {
    mg::harness::StubModelConfig cfg;
    cfg.model_id = mg::ModelId::Parse(model_id);
    cfg.truth.weights = weights;
    cfg.accuracy = accuracy;
    auto stub = std::make_shared<mg::harness::StubModel>(cfg, seed);
    mg::BackendServer server(stub, std::chrono::milliseconds(delay_ms));
    std::cerr << model_id << " listening on " << host << ":" << port << "\n";
    return server.Run(host, port) ? 0 : 1;
  } catch (const mg::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modelgate HTTP server"};
  app.require_subcommand(1);

  std::string config;
  auto* gateway = app.add_subcommand("gateway", "run the gateway with its admin API");
  gateway->add_option("--config", config, "gateway config JSON")->required()->check(CLI::ExistingFile);

  std::string model_id, host = "127.0.0.1";
  std::vector<double> weights{1.0};
  double accuracy = 0.9;
  uint64_t seed = 1;
  int port = 9001, delay_ms = 0;
  auto* stub = app.add_subcommand("stub", "serve a synthetic model");
  stub->add_option("--model-id", model_id)->required();
  stub->add_option("--weights", weights, "linear truth rule over the features")->delimiter(',');
  stub->add_option("--accuracy", accuracy)->check(CLI::Range(0.0, 1.0));
  stub->add_option("--seed", seed);
  stub->add_option("--host", host);
  stub->add_option("--port", port);
  stub->add_option("--delay-ms", delay_ms, "sleep before each reply");

  CLI11_PARSE(app, argc, argv);
  if (*gateway) return ServeGateway(config);
  return ServeStub(model_id, weights, accuracy, seed, host, port, delay_ms);
}
