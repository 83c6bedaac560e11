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

#include "modelgate/factbox.h"

#include <algorithm>
#include <cstdio>
#include <vector>

#include "json_codec.h"
#include "modelgate/analytics.h"

namespace modelgate {

namespace {

constexpr char kNa[] = "n/a";

bool LeftStage(const ModelRecord& record, Stage from, Stage to) {
  return std::any_of(record.history.begin(), record.history.end(),
                     [&](const StageChange& c) { return c.from == from && c.to == to; });
}

std::string CanaryVerdict(const ModelRecord& record) {
  if (LeftStage(record, Stage::kCanary, Stage::kThresholded) ||
      LeftStage(record, Stage::kCanary, Stage::kFull)) {
    return "passed";
  }
  if (LeftStage(record, Stage::kCanary, Stage::kRetired)) return "failed";
  if (record.stage == Stage::kCanary) return "in progress";
  return kNa;
}

// Entries from the first to the last request `id` served as a canary.
std::span<const LogEntry> CanaryWindow(std::span<const LogEntry> log, const ModelId& id) {
  auto served = [&](const LogEntry& e) {
    return e.served_rule == ServeRule::kChallengerCanary && e.served &&
           e.served->served_by == id;
  };
  auto first = std::find_if(log.begin(), log.end(), served);
  if (first == log.end()) return {};
  auto last = std::find_if(log.rbegin(), log.rend(), served).base();
  return log.subspan(first - log.begin(), last - first);
}

std::string IdOrNa(const std::optional<ModelId>& id) { return id ? id->ToString() : kNa; }

}  // namespace

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s + "%";
}

FactBox BuildFactBox(const ModelRecord& record, std::span<const LogEntry> log) {
  FactBox box;
  box.id = record.id;
  box.based_on = record.based_on;
  box.related_to = record.related_to;
  box.stage = record.stage;
  box.deployed_at = record.deployed_at;
  if (record.deployed_at) box.deployment_id = record.deployment_id;
  box.test_id = record.test_id;
  box.signed_off = record.signed_off;

  box.canary.verdict = CanaryVerdict(record);
  RateStats own = ComputeGoodRate(log, record.id, ServeRule::kChallengerCanary);
  box.canary.pass_rate = own.rate;
  box.canary.sample_size = own.count;
  if (record.based_on) {
    box.canary.previous_pass_rate =
        ComputeGoodRate(log, *record.based_on, ServeRule::kChallengerCanary).rate;
    if (!box.canary.previous_pass_rate && own.count > 0) {
      // The reference never ran as a canary (a bootstrapped champion): use
      // what it scored over this version's canary window instead.
      box.canary.previous_pass_rate =
          ComputeGoodRate(CanaryWindow(log, record.id), *record.based_on).rate;
    }
    // Agreement with the reference while this version ran as a shadow.
    std::vector<LogEntry> shadowed;
    for (const auto& e : log) {
      if (std::find(e.shadow_targets.begin(), e.shadow_targets.end(), record.id) !=
          e.shadow_targets.end()) {
        shadowed.push_back(e);
      }
    }
    AgreementStats agreement = ComputeAgreement(shadowed, record.id, *record.based_on);
    box.shadow.reference = record.based_on;
    box.shadow.agreement = agreement.rate;
    box.shadow.compared = agreement.common;
  }
  return box;
}

FactBox BuildFactBox(const Registry& registry, const CallLog& log, const ModelId& id) {
  ModelRecord record = registry.Get(id);
  std::vector<LogEntry> entries = log.Entries();
  return BuildFactBox(record, entries);
}

std::string FactBoxToJson(const FactBox& box) {
  using json::Json;
  using json::OrNa;
  Json provenance = Json::object();
  provenance["id"] = box.id.ToString();
  provenance["based_on"] = IdOrNa(box.based_on);
  provenance["related_to"] = box.related_to.empty() ? kNa : box.related_to;

  Json canary = Json::object();
  canary["verdict"] = box.canary.verdict;
  canary["pass_rate"] = OrNa(box.canary.pass_rate);
  canary["previous_pass_rate"] = OrNa(box.canary.previous_pass_rate);
  canary["sample_size"] = box.canary.sample_size;
  Json shadow = Json::object();
  shadow["reference"] = IdOrNa(box.shadow.reference);
  shadow["agreement"] = OrNa(box.shadow.agreement);
  shadow["compared"] = box.shadow.compared;

  Json usage = Json::object();
  usage["stage"] = std::string(StageName(box.stage));
  usage["deployed_at"] = box.deployed_at ? FormatTimestamp(*box.deployed_at) : kNa;
  usage["deployment_id"] = OrNa(box.deployment_id);
  usage["canary_result"] = std::move(canary);
  usage["shadow"] = std::move(shadow);

  Json testing = Json::object();
  testing["test_id"] = OrNa(box.test_id);
  testing["signed_off"] = OrNa(box.signed_off);

  Json out = Json::object();
  out["provenance"] = std::move(provenance);
  out["usage"] = std::move(usage);
  out["testing"] = std::move(testing);
  return json::Dump(out);
}

std::string RenderFactBoxText(const FactBox& box) {
  std::vector<std::string> left = {
      "Provenance:",
      "ID: " + box.id.ToString(),
      "Based on: " + IdOrNa(box.based_on),
      "Related to: " + (box.related_to.empty() ? std::string(kNa) : box.related_to),
  };

  std::string deployed = "Deployed in production: ";
  if (box.deployed_at) {
    deployed += FormatDate(*box.deployed_at) + " " + box.deployment_id.value_or(kNa);
  } else {
    deployed += kNa;
  }
  std::string canary = "Canary-test-results: " + box.canary.verdict;
  if (box.canary.pass_rate) {
    canary += " (" + FormatPercent(*box.canary.pass_rate);
    if (box.canary.previous_pass_rate) {
      canary += ", previous " + FormatPercent(*box.canary.previous_pass_rate);
    }
    canary += ")";
  }
  std::string shadow = "Shadow: ";
  if (box.shadow.reference) {
    shadow += box.shadow.reference->ToString();
    shadow += box.shadow.agreement
                  ? " (agreement " + FormatPercent(*box.shadow.agreement) + ")"
                  : " (agreement n/a)";
  } else {
    shadow += kNa;
  }
  std::vector<std::string> right = {"Usage:", deployed, canary, shadow};

  size_t width = 0;
  for (const auto& l : left) width = std::max(width, l.size());
  width += 4;
  std::string out;
  for (size_t i = 0; i < left.size(); ++i) {
    std::string line = left[i];
    line.resize(width, ' ');
    out += line + right[i] + "\n";
  }
  out += "Testing:\n";
  out += "ID: " + box.test_id.value_or(kNa) + "\n";
  out += "Signed-off: " + box.signed_off.value_or(kNa) + "\n";
  return out;
}

}  // namespace modelgate
