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

#ifndef MODELGATE_DRIFT_H_
#define MODELGATE_DRIFT_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modelgate/clustering.h"
#include "modelgate/protocol.h"

namespace modelgate {

struct DriftOptions {
  size_t bins = 10;
  double alarm_threshold = 0.2;
  double epsilon = 1e-4;  // proportion floor before the log ratio
  double anomaly_factor = kDefaultAnomalyFactor;
};

struct DriftReport {
  // Feature order follows the reference schema.
  std::vector<std::pair<std::string, double>> per_feature;
  double aggregate = 0.0;  // max over features
  double anomalous_rate = 0.0;
  bool clusters_available = false;  // false: anomalous_rate is 0 by default
  bool alarm = false;
  size_t reference_size = 0;
  size_t current_size = 0;
};

// Proportions over `bins` equal-width bins spanning [lo, hi], with an
// underflow bin first and an overflow bin last (bins + 2 entries).
std::vector<double> BinProportions(std::span<const double> values, double lo, double hi,
                                   size_t bins);

// Population stability index: sum of (c - r) * ln(c / r), each proportion
// floored at epsilon.
double Psi(std::span<const double> reference, std::span<const double> current,
           double epsilon = 1e-4);

// Per-feature PSI of `current` against bins fitted to `reference`. Throws
// kEmptyWindow when either side is empty and kInconsistentSchema when the
// schemas differ.
DriftReport ComputeDrift(std::span<const FeatureVector> reference,
                         std::span<const FeatureVector> current,
                         const ClusterModel* clusters = nullptr,
                         const DriftOptions& options = {});

}  // namespace modelgate

#endif  // MODELGATE_DRIFT_H_
