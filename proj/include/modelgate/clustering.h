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

#ifndef MODELGATE_CLUSTERING_H_
#define MODELGATE_CLUSTERING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modelgate/protocol.h"
#include "modelgate/time.h"

namespace modelgate {

struct ClusterStats {
  uint64_t size = 0;
  // Filled from joined feedback when the model is fitted from the call log;
  // nullopt when no training point had feedback.
  std::optional<double> good_rate;
  std::optional<double> mean_confidence;
};

// Historical input clusters. Indices are 0-based.
struct ClusterModel {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> centroids;
  // 95th-percentile distance of each cluster's training members.
  std::vector<double> radii;
  std::vector<ClusterStats> stats;
  Timestamp fitted_at{};
  uint64_t training_from_seq = 0;
  uint64_t training_to_seq = 0;
  // Within-cluster sum of squares after each assignment step.
  std::vector<double> objective_trace;
  size_t iterations = 0;

  size_t k() const { return centroids.size(); }
};

struct FitOptions {
  size_t max_iterations = 100;
  double tolerance = 1e-6;  // largest centroid shift that counts as converged
};

// Lloyd's algorithm with k-means++ seeding. Throws kTooFewPoints when there
// are fewer than k distinct points and kInconsistentSchema when the vectors
// disagree on feature names.
ClusterModel FitClusters(std::span<const FeatureVector> vectors, size_t k, uint64_t seed,
                         const FitOptions& options = {});

struct ClusterAssignment {
  size_t index = 0;
  double distance = 0.0;
  bool anomalous = false;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

inline constexpr double kDefaultAnomalyFactor = 1.5;

// Nearest centroid, ties to the smallest index. Anomalous iff the distance
// exceeds gamma times that cluster's radius. Throws kSchemaMismatch.
ClusterAssignment Assign(const FeatureVector& features, const ClusterModel& model,
                         double gamma = kDefaultAnomalyFactor);

double SquaredDistance(std::span<const double> a, std::span<const double> b);

}  // namespace modelgate

#endif  // MODELGATE_CLUSTERING_H_
