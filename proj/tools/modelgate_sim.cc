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

// Scenario runner and log inspector.
//
//   modelgate-sim run --scenario scenarios/good_challenger.json --seed 7 --out report.json
//   modelgate-sim replay --log /tmp/run1 --stats

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json_codec.h"
#include "modelgate/analytics.h"
#include "modelgate/call_log.h"
#include "modelgate/harness/scenario.h"
#include "view_json.h"

namespace mg = modelgate;
namespace mh = modelgate::harness;

namespace {

int WriteOut(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
    return 0;
  }
  std::ofstream f(out);
  f << text << "\n";
  if (!f) {
    std::cerr << "cannot write " << out << "\n";
    return 1;
  }
  return 0;
}

int Run(const std::string& scenario_path, std::optional<uint64_t> seed, const std::string& mode,
        const std::string& log_dir, const std::string& out) {
  mh::RunOptions options;
  options.seed = seed;
  if (mode == "staged") {
    options.mode = mh::RunMode::kStaged;
  } else if (mode == "direct_cutover") {
    options.mode = mh::RunMode::kDirectCutover;
  }
  options.log_dir = log_dir;
  try {
    mh::ScenarioRunner runner(mh::LoadScenario(scenario_path), options);
    mh::ScenarioReport report = runner.Run();
    std::fprintf(stderr, "%s: %llu requests, %llu errors, %zu stage events\n",
                 report.name.c_str(), static_cast<unsigned long long>(report.total),
                 static_cast<unsigned long long>(report.errors), report.timeline.size());
    return WriteOut(report.ToJson(), out);
  } catch (const mh::ScenarioAborted& e) {
    std::cerr << e.what() << "\n";
    WriteOut(e.partial_report(), out);
    return 3;
  } catch (const mg::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int Replay(const std::string& dir, bool stats, const std::string& out) {
  std::vector<mg::LogEntry> entries;
  try {
    entries = mg::CallLog::ReadEntries(dir);
  } catch (const mg::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  mg::json::Json j = mg::json::Json::object();
  j["entries"] = entries.size();
  uint64_t failed = 0, with_feedback = 0;
  std::set<mg::ModelId> models;
  for (const auto& e : entries) {
    if (e.error) ++failed;
    if (e.feedback) ++with_feedback;
    if (e.served) models.insert(e.served->served_by);
  }
  j["errors"] = failed;
  j["feedback"] = with_feedback;
  if (stats) {
    mg::json::Json per_model = mg::json::Json::object();
    for (const auto& m : models) {
      per_model[m.ToString()] = mg::json::ToJson(mg::ComputeUsageStats(entries, m));
    }
    j["models"] = std::move(per_model);
  }
  return WriteOut(j.dump(2), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modelgate scenario simulator"};
  app.require_subcommand(1);

  std::string scenario, mode, log_dir, out;
  std::optional<uint64_t> seed;
  auto* run = app.add_subcommand("run", "run a scenario and write its report");
  run->add_option("--scenario", scenario, "scenario JSON document")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--mode", mode, "override the run mode")
      ->check(CLI::IsMember({"staged", "direct_cutover"}));
  run->add_option("--log-dir", log_dir, "persist registry and call log here");
  run->add_option("--out", out, "report path (default stdout)");

  std::string replay_dir;
  bool stats = false;
  auto* replay = app.add_subcommand("replay", "summarize a persisted call log");
  replay->add_option("--log", replay_dir, "call log directory")->required();
  replay->add_flag("--stats", stats, "per-model usage statistics");
  replay->add_option("--out", out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);
  if (*run) return Run(scenario, seed, mode, log_dir, out);
  // Accept the data directory or the log directory inside it.
  std::filesystem::path dir = replay_dir;
  if (std::filesystem::is_directory(dir / "log")) dir /= "log";
  return Replay(dir.string(), stats, out);
}
