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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../oracles.h"
#include "modelgate/error.h"

namespace modelgate {
namespace {

FeatureVector Point2(double x, double y) { return {{{"x", x}, {"y", y}}}; }

// Means (0,0) and (10,10), sigma 0.5, 100 points each.
std::vector<FeatureVector> Planted(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<FeatureVector> pts;
  for (int i = 0; i < 100; ++i) pts.push_back(Point2(n(rng), n(rng)));
  for (int i = 0; i < 100; ++i) pts.push_back(Point2(10 + n(rng), 10 + n(rng)));
  return pts;
}

TEST(ClusteringTest, RecoversPlantedCentroids) {
  std::vector<FeatureVector> pts = Planted(42);
  ClusterModel m = FitClusters(pts, 2, 7);
  ASSERT_EQ(m.k(), 2u);
  for (const auto& planted : {std::vector<double>{0, 0}, std::vector<double>{10, 10}}) {
    double best = INFINITY;
    for (const auto& c : m.centroids) best = std::min(best, std::sqrt(SquaredDistance(c, planted)));
    EXPECT_LT(best, 0.3);
  }
  EXPECT_EQ(m.stats[0].size + m.stats[1].size, 200u);
}

TEST(ClusteringTest, ObjectiveNeverIncreases) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<FeatureVector> pts;
    for (int i = 0; i < 150; ++i) pts.push_back(Point2(u(rng), u(rng)));
    ClusterModel m = FitClusters(pts, 5, seed);
    ASSERT_FALSE(m.objective_trace.empty());
    for (size_t i = 1; i < m.objective_trace.size(); ++i) {
      EXPECT_LE(m.objective_trace[i], m.objective_trace[i - 1] + 1e-9) << "seed " << seed;
    }
    // The last trace entry is the objective of the returned centroids.
    std::vector<oracle::Point> raw, cs;
    for (const auto& p : pts) raw.push_back({p.features[0].value, p.features[1].value});
    for (const auto& c : m.centroids) cs.push_back({c[0], c[1]});
    EXPECT_NEAR(oracle::Wcss(raw, cs), m.objective_trace.back(), 1e-6);
  }
}

TEST(ClusteringTest, SingleClusterIsCoordinateMean) {
  std::vector<FeatureVector> pts = Planted(3);
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    sx += p.features[0].value;
    sy += p.features[1].value;
  }
  ClusterModel m = FitClusters(pts, 1, 1);
  EXPECT_NEAR(m.centroids[0][0], sx / pts.size(), 1e-9);
  EXPECT_NEAR(m.centroids[0][1], sy / pts.size(), 1e-9);
}

TEST(ClusteringTest, SameSeedSameModel) {
  std::vector<FeatureVector> pts = Planted(5);
  ClusterModel a = FitClusters(pts, 3, 11);
  ClusterModel b = FitClusters(pts, 3, 11);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(ClusteringTest, RejectsBadInput) {
  std::vector<FeatureVector> pts{Point2(0, 0), Point2(0, 0), Point2(1, 1)};
  try {
    FitClusters(pts, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPoints);
  }
  pts.push_back({{{"z", 1.0}, {"y", 2.0}}});
  try {
    FitClusters(pts, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentSchema);
  }
}

TEST(ClusteringTest, AssignFlagsFarPointsAsAnomalous) {
  ClusterModel m = FitClusters(Planted(8), 2, 2);
  ClusterAssignment near = Assign(Point2(0.1, -0.1), m);
  EXPECT_FALSE(near.anomalous);
  EXPECT_LT(SquaredDistance(m.centroids[near.index], std::vector<double>{0, 0}), 0.1);
  ClusterAssignment far = Assign(Point2(5, 5), m);
  EXPECT_TRUE(far.anomalous);
  try {
    Assign({{{"x", 1.0}}}, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

}  // namespace
}  // namespace modelgate
