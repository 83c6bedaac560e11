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

#ifndef MODELGATE_HARNESS_TRAFFIC_H_
#define MODELGATE_HARNESS_TRAFFIC_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "modelgate/protocol.h"

namespace modelgate::harness {

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal covariance
};

// From request index at + 1 on, `shift` is added to every mean. Shifts
// accumulate.
struct DriftStep {
  uint64_t at = 0;
  std::vector<double> shift;
};

struct TrafficConfig {
  std::vector<std::string> features;
  std::vector<MixtureComponent> mixture;
  std::vector<DriftStep> drift;
  uint64_t total = 0;
  uint64_t seed = 1;
  Timestamp start{};
  std::chrono::milliseconds interval{1000};

  void Validate() const;  // throws kConfigError
};

// Deterministic request stream req-000001, req-000002, ... Equal configs
// give identical streams.
class TrafficGenerator {
 public:
  explicit TrafficGenerator(TrafficConfig config);

  std::optional<ScoreRequest> Next();
  uint64_t emitted() const { return emitted_; }

 private:
  TrafficConfig config_;
  std::mt19937_64 rng_;
  std::discrete_distribution<size_t> pick_;
  uint64_t emitted_ = 0;
};

std::vector<ScoreRequest> GenerateTraffic(const TrafficConfig& config);

std::string RequestIdFor(uint64_t index);

}  // namespace modelgate::harness

#endif  // MODELGATE_HARNESS_TRAFFIC_H_
