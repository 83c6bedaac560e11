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

#include "modelgate/clustering.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "modelgate/error.h"

namespace modelgate {

namespace {

double NearestRankPercentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  size_t rank = static_cast<size_t>(std::ceil(p * static_cast<double>(values.size())));
  rank = std::clamp<size_t>(rank, 1, values.size());
  return values[rank - 1];
}

// Index of the nearest centroid; strict comparison keeps the smallest index on
// ties.
std::pair<size_t, double> Nearest(std::span<const double> point,
                                  const std::vector<std::vector<double>>& centroids) {
  size_t best = 0;
  double best_d2 = SquaredDistance(point, centroids[0]);
  for (size_t j = 1; j < centroids.size(); ++j) {
    double d2 = SquaredDistance(point, centroids[j]);
    if (d2 < best_d2) {
      best = j;
      best_d2 = d2;
    }
  }
  return {best, best_d2};
}

}  // namespace

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

ClusterModel FitClusters(std::span<const FeatureVector> vectors, size_t k, uint64_t seed,
                         const FitOptions& options) {
  if (k == 0) throw Error(ErrorCode::kTooFewPoints, "k must be at least 1");
  if (vectors.empty()) throw Error(ErrorCode::kTooFewPoints, "no training vectors");
  ClusterModel model;
  model.feature_names = vectors.front().Names();
  const size_t dim = model.feature_names.size();

  std::vector<std::vector<double>> points;
  points.reserve(vectors.size());
  for (const auto& fv : vectors) {
    if (fv.Names() != model.feature_names) {
      throw Error(ErrorCode::kInconsistentSchema, "training vectors disagree on feature names");
    }
    points.push_back(fv.Values());
  }
  std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (distinct.size() < k) {
    throw Error(ErrorCode::kTooFewPoints, "need " + std::to_string(k) + " distinct points, have " +
                                              std::to_string(distinct.size()));
  }

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[std::uniform_int_distribution<size_t>(0, points.size() - 1)(rng)]);
  std::vector<double> d2(points.size());
  while (centroids.size() < k) {
    for (size_t i = 0; i < points.size(); ++i) d2[i] = Nearest(points[i], centroids).second;
    std::discrete_distribution<size_t> pick(d2.begin(), d2.end());
    centroids.push_back(points[pick(rng)]);
  }

  // Lloyd iterations.
  std::vector<size_t> assignment(points.size(), 0);
  for (size_t iter = 0; iter < options.max_iterations; ++iter) {
    double objective = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      auto [j, dist2] = Nearest(points[i], centroids);
      assignment[i] = j;
      objective += dist2;
    }
    model.objective_trace.push_back(objective);
    model.iterations = iter + 1;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < points.size(); ++i) {
      ++counts[assignment[i]];
      for (size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    double max_shift = 0.0;
    for (size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;  // empty cluster keeps its centroid
      for (size_t d = 0; d < dim; ++d) sums[j][d] /= static_cast<double>(counts[j]);
      max_shift = std::max(max_shift, std::sqrt(SquaredDistance(sums[j], centroids[j])));
      centroids[j] = std::move(sums[j]);
    }
    if (max_shift < options.tolerance) break;
  }

  // Final assignment against the converged centroids.
  std::vector<std::vector<double>> member_distances(k);
  for (size_t i = 0; i < points.size(); ++i) {
    auto [j, dist2] = Nearest(points[i], centroids);
    assignment[i] = j;
    member_distances[j].push_back(std::sqrt(dist2));
  }
  model.centroids = std::move(centroids);
  model.radii.resize(k);
  model.stats.resize(k);
  for (size_t j = 0; j < k; ++j) {
    model.radii[j] = NearestRankPercentile(member_distances[j], 0.95);
    model.stats[j].size = member_distances[j].size();
  }
  return model;
}

ClusterAssignment Assign(const FeatureVector& features, const ClusterModel& model, double gamma) {
  if (model.centroids.empty()) {
    throw Error(ErrorCode::kSchemaMismatch, "cluster model has no centroids");
  }
  if (features.Names() != model.feature_names) {
    throw Error(ErrorCode::kSchemaMismatch, "feature names do not match the cluster model");
  }
  std::vector<double> point = features.Values();
  auto [index, dist2] = Nearest(point, model.centroids);
  double distance = std::sqrt(dist2);
  return {index, distance, distance > gamma * model.radii[index]};
}

}  // namespace modelgate
