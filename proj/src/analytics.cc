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

#include <algorithm>
#include <cmath>

#include "modelgate/error.h"

namespace modelgate {

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  auto rank = static_cast<size_t>(std::ceil(p * static_cast<double>(values.size())));
  rank = std::clamp<size_t>(rank, 1, values.size());
  return values[rank - 1];
}

UsageStats ComputeUsageStats(std::span<const LogEntry> window, const ModelId& model) {
  UsageStats stats;
  stats.model = model;
  if (!window.empty()) {
    stats.from_seq = window.front().seq;
    stats.to_seq = window.back().seq;
  }
  std::vector<double> latencies;
  double confidence_sum = 0.0;
  uint64_t good = 0;
  for (const auto& e : window) {
    if (!e.served || e.served->served_by != model) continue;
    if (e.served->predictions.empty()) {
      ++stats.escalated_without_predictions;
      continue;
    }
    ++stats.call_count;
    ++stats.label_distribution[e.served->Top()->result];
    double c = e.served->TopConfidence();
    confidence_sum += c;
    auto bin = static_cast<size_t>(std::floor(c * 10.0));
    ++stats.confidence_histogram[std::min<size_t>(bin, 9)];
    latencies.push_back(e.served->latency_ms);
    if (e.feedback) {
      ++stats.feedback_count;
      if (e.feedback->verdict == Verdict::kGood) ++good;
    }
  }
  if (stats.call_count > 0) {
    stats.mean_confidence = confidence_sum / static_cast<double>(stats.call_count);
  }
  stats.latency = {Percentile(latencies, 0.50), Percentile(latencies, 0.95),
                   Percentile(latencies, 0.99)};
  if (stats.feedback_count > 0) {
    stats.good_rate = static_cast<double>(good) / static_cast<double>(stats.feedback_count);
  }
  return stats;
}

AgreementStats ComputeAgreement(std::span<const LogEntry> window, const ModelId& a,
                                const ModelId& b) {
  AgreementStats stats;
  for (const auto& e : window) {
    auto la = e.TopLabelOf(a);
    if (!la) continue;
    auto lb = a == b ? la : e.TopLabelOf(b);
    if (!lb) continue;
    ++stats.common;
    if (*la == *lb) ++stats.agreed;
  }
  if (stats.common > 0) {
    stats.rate = static_cast<double>(stats.agreed) / static_cast<double>(stats.common);
  }
  return stats;
}

RateStats ComputeGoodRate(std::span<const LogEntry> window, const ModelId& model,
                          std::optional<ServeRule> rule) {
  RateStats stats;
  for (const auto& e : window) {
    if (!e.served || e.served->served_by != model || !e.feedback) continue;
    if (rule && e.served_rule != rule) continue;
    ++stats.count;
    if (e.feedback->verdict == Verdict::kGood) ++stats.good;
  }
  if (stats.count > 0) {
    stats.rate = static_cast<double>(stats.good) / static_cast<double>(stats.count);
  }
  return stats;
}

std::vector<FeatureVector> FeaturesOf(std::span<const LogEntry> window) {
  std::vector<FeatureVector> out;
  out.reserve(window.size());
  for (const auto& e : window) out.push_back(e.features);
  return out;
}

ClusterModel FitClustersFromLog(std::span<const LogEntry> window, size_t k, uint64_t seed,
                                Timestamp fitted_at, double gamma) {
  std::vector<FeatureVector> vectors = FeaturesOf(window);
  ClusterModel model = FitClusters(vectors, k, seed);
  model.fitted_at = fitted_at;
  if (!window.empty()) {
    model.training_from_seq = window.front().seq;
    model.training_to_seq = window.back().seq;
  }
  std::vector<uint64_t> feedback(k, 0), good(k, 0), served(k, 0);
  std::vector<double> confidence(k, 0.0);
  for (const auto& e : window) {
    size_t c = Assign(e.features, model, gamma).index;
    if (e.served && !e.served->predictions.empty()) {
      ++served[c];
      confidence[c] += e.served->TopConfidence();
    }
    if (e.feedback) {
      ++feedback[c];
      if (e.feedback->verdict == Verdict::kGood) ++good[c];
    }
  }
  for (size_t c = 0; c < k; ++c) {
    if (feedback[c] > 0) {
      model.stats[c].good_rate = static_cast<double>(good[c]) / static_cast<double>(feedback[c]);
    }
    if (served[c] > 0) {
      model.stats[c].mean_confidence = confidence[c] / static_cast<double>(served[c]);
    }
  }
  return model;
}

}  // namespace modelgate
