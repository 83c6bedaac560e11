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

#include "modelgate/harness/traffic.h"

#include <cmath>
#include <cstdio>

#include "modelgate/error.h"

namespace modelgate::harness {

namespace {

std::vector<double> Weights(const std::vector<MixtureComponent>& mixture) {
  std::vector<double> w;
  for (const auto& c : mixture) w.push_back(c.weight);
  return w;
}

}  // namespace

void TrafficConfig::Validate() const {
  if (features.empty()) throw Error(ErrorCode::kConfigError, "traffic needs at least one feature");
  if (mixture.empty()) throw Error(ErrorCode::kConfigError, "traffic needs a mixture component");
  double sum = 0.0;
  for (const auto& c : mixture) {
    if (!(c.weight >= 0.0)) throw Error(ErrorCode::kConfigError, "mixture weight must be >= 0");
    if (c.mean.size() != features.size() || c.variance.size() != features.size()) {
      throw Error(ErrorCode::kConfigError, "mixture dimensions must match the feature list");
    }
    for (double v : c.variance) {
      if (!(v >= 0.0)) throw Error(ErrorCode::kConfigError, "variance must be >= 0");
    }
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kConfigError, "mixture weights must sum to 1");
  }
  for (const auto& d : drift) {
    if (d.shift.size() != features.size()) {
      throw Error(ErrorCode::kConfigError, "drift shift dimension must match the feature list");
    }
  }
  if (interval.count() < 0) throw Error(ErrorCode::kConfigError, "interval must be >= 0");
}

std::string RequestIdFor(uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "req-%06llu", static_cast<unsigned long long>(index));
  return buf;
}

TrafficGenerator::TrafficGenerator(TrafficConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  config_.Validate();
  auto w = Weights(config_.mixture);
  pick_ = std::discrete_distribution<size_t>(w.begin(), w.end());
}

std::optional<ScoreRequest> TrafficGenerator::Next() {
  if (emitted_ >= config_.total) return std::nullopt;
  uint64_t index = ++emitted_;
  const MixtureComponent& c = config_.mixture[pick_(rng_)];
  ScoreRequest req;
  req.request_id = RequestIdFor(index);
  req.timestamp = config_.start + config_.interval * static_cast<int64_t>(index - 1);
  for (size_t i = 0; i < config_.features.size(); ++i) {
    double mean = c.mean[i];
    for (const auto& d : config_.drift) {
      if (index > d.at) mean += d.shift[i];
    }
    double z = std::normal_distribution<double>(0.0, 1.0)(rng_);
    req.features.features.push_back({config_.features[i], mean + std::sqrt(c.variance[i]) * z});
  }
  return req;
}

std::vector<ScoreRequest> GenerateTraffic(const TrafficConfig& config) {
  TrafficGenerator gen(config);
  std::vector<ScoreRequest> out;
  out.reserve(config.total);
  while (auto r = gen.Next()) out.push_back(std::move(*r));
  return out;
}

}  // namespace modelgate::harness
