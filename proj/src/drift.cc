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

#include "modelgate/drift.h"

#include <algorithm>
#include <cmath>

#include "modelgate/error.h"

namespace modelgate {

std::vector<double> BinProportions(std::span<const double> values, double lo, double hi,
                                   size_t bins) {
  std::vector<double> counts(bins + 2, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    size_t slot;
    if (v < lo) {
      slot = 0;
    } else if (v > hi) {
      slot = bins + 1;
    } else if (width <= 0.0) {
      slot = 1;
    } else {
      auto b = static_cast<size_t>(std::floor((v - lo) / width));
      slot = 1 + std::min(b, bins - 1);
    }
    counts[slot] += 1.0;
  }
  if (!values.empty()) {
    for (double& c : counts) c /= static_cast<double>(values.size());
  }
  return counts;
}

double Psi(std::span<const double> reference, std::span<const double> current, double epsilon) {
  if (reference.size() != current.size()) {
    throw Error(ErrorCode::kInconsistentSchema, "PSI needs equally binned distributions");
  }
  double psi = 0.0;
  for (size_t b = 0; b < reference.size(); ++b) {
    double r = std::max(reference[b], epsilon);
    double c = std::max(current[b], epsilon);
    psi += (c - r) * std::log(c / r);
  }
  return psi;
}

DriftReport ComputeDrift(std::span<const FeatureVector> reference,
                         std::span<const FeatureVector> current, const ClusterModel* clusters,
                         const DriftOptions& options) {
  if (reference.empty()) throw Error(ErrorCode::kEmptyWindow, "reference window is empty");
  if (current.empty()) throw Error(ErrorCode::kEmptyWindow, "current window is empty");
  if (options.bins == 0) throw Error(ErrorCode::kInvalidConfig, "bins must be positive");
  const std::vector<std::string> names = reference.front().Names();
  auto check = [&](std::span<const FeatureVector> window) {
    for (const auto& fv : window) {
      if (fv.Names() != names) {
        throw Error(ErrorCode::kInconsistentSchema, "drift windows disagree on feature names");
      }
    }
  };
  check(reference);
  check(current);

  DriftReport report;
  report.reference_size = reference.size();
  report.current_size = current.size();
  std::vector<double> ref_values(reference.size());
  std::vector<double> cur_values(current.size());
  for (size_t f = 0; f < names.size(); ++f) {
    for (size_t i = 0; i < reference.size(); ++i) ref_values[i] = reference[i].features[f].value;
    for (size_t i = 0; i < current.size(); ++i) cur_values[i] = current[i].features[f].value;
    auto [lo, hi] = std::minmax_element(ref_values.begin(), ref_values.end());
    double psi = Psi(BinProportions(ref_values, *lo, *hi, options.bins),
                     BinProportions(cur_values, *lo, *hi, options.bins), options.epsilon);
    report.per_feature.emplace_back(names[f], psi);
    report.aggregate = std::max(report.aggregate, psi);
  }
  if (clusters != nullptr && clusters->k() > 0) {
    size_t anomalous = 0;
    for (const auto& fv : current) {
      if (Assign(fv, *clusters, options.anomaly_factor).anomalous) ++anomalous;
    }
    report.clusters_available = true;
    report.anomalous_rate = static_cast<double>(anomalous) / static_cast<double>(current.size());
  }
  report.alarm = report.aggregate >= options.alarm_threshold;
  return report;
}

}  // namespace modelgate
