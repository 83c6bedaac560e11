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

#ifndef MODELGATE_ANALYTICS_H_
#define MODELGATE_ANALYTICS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modelgate/call_log.h"
#include "modelgate/clustering.h"
#include "modelgate/drift.h"

// Statistics derived from the call log. All functions here are pure over a
// window of entries, so replaying a persisted log reproduces them exactly.
namespace modelgate {

struct LatencySummary {
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
};

struct UsageStats {
  ModelId model;
  uint64_t from_seq = 0;
  uint64_t to_seq = 0;
  // Responses with at least one prediction served by `model`.
  uint64_t call_count = 0;
  // Escalations served by `model` with an empty prediction list; not part of
  // call_count or the histograms.
  uint64_t escalated_without_predictions = 0;
  std::map<std::string, uint64_t> label_distribution;  // top-1 labels
  double mean_confidence = 0.0;
  std::array<uint64_t, 10> confidence_histogram{};  // equal bins on [0,1]
  LatencySummary latency;
  uint64_t feedback_count = 0;
  std::optional<double> good_rate;  // nullopt when no feedback joined
};

UsageStats ComputeUsageStats(std::span<const LogEntry> window, const ModelId& model);

// Nearest-rank percentile; 0 for an empty sample.
double Percentile(std::vector<double> values, double p);

struct AgreementStats {
  uint64_t common = 0;
  uint64_t agreed = 0;
  std::optional<double> rate;  // nullopt when no common requests
};

// Fraction of requests answered by both models whose top-1 labels match.
AgreementStats ComputeAgreement(std::span<const LogEntry> window, const ModelId& a,
                                const ModelId& b);

struct RateStats {
  uint64_t count = 0;
  uint64_t good = 0;
  std::optional<double> rate;
};

// Good-feedback fraction among requests `model` served under `rule`.
RateStats ComputeGoodRate(std::span<const LogEntry> window, const ModelId& model,
                          std::optional<ServeRule> rule = std::nullopt);

std::vector<FeatureVector> FeaturesOf(std::span<const LogEntry> window);

// Fits clusters on the window's inputs and fills per-cluster good rate and
// mean served confidence from the same entries.
ClusterModel FitClustersFromLog(std::span<const LogEntry> window, size_t k, uint64_t seed,
                                Timestamp fitted_at, double gamma = kDefaultAnomalyFactor);

}  // namespace modelgate

#endif  // MODELGATE_ANALYTICS_H_
