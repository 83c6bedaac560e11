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

#include "modelgate/harness/stub_model.h"

#include <algorithm>
#include <cmath>

#include "modelgate/error.h"
#include "modelgate/policy.h"

namespace modelgate::harness {

namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Uniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

void RequireUnit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kConfigError, std::string(what) + " must be in [0,1]");
  }
}

}  // namespace

std::string TruthRule::Label(const FeatureVector& features) const {
  double s = bias;
  size_t n = std::min(weights.size(), features.size());
  for (size_t i = 0; i < n; ++i) s += weights[i] * features.features[i].value;
  return s > 0.0 ? positive : negative;
}

const std::string& TruthRule::Other(const std::string& label) const {
  return label == positive ? negative : positive;
}

bool ErrorSchedule::Hits(uint64_t index) const {
  if (every == 0 || index < from || index > to) return false;
  return (index - from + 1) % every == 0;
}

void StubModelConfig::Validate() const {
  RequireUnit(accuracy, "accuracy");
  RequireUnit(failure_rate, "failure_rate");
  if (fixed_confidence) RequireUnit(*fixed_confidence, "fixed confidence");
  for (const BetaParams* b : {&correct_confidence, &wrong_confidence}) {
    if (!(b->alpha > 0.0) || !(b->beta > 0.0)) {
      throw Error(ErrorCode::kConfigError, "beta parameters must be positive");
    }
  }
  if (latency_mean_ms < 0.0 || latency_jitter_ms < 0.0) {
    throw Error(ErrorCode::kConfigError, "latency must be non-negative");
  }
  if (truth.positive == truth.negative) {
    throw Error(ErrorCode::kConfigError, "truth labels must differ");
  }
  for (const auto& s : forced_errors) {
    if (s.every == 0 || s.to < s.from) {
      throw Error(ErrorCode::kConfigError, "forced error schedule needs from <= to, every >= 1");
    }
  }
}

double SampleBeta(const BetaParams& params, std::mt19937_64& rng) {
  double x = std::gamma_distribution<double>(params.alpha, 1.0)(rng);
  double y = std::gamma_distribution<double>(params.beta, 1.0)(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

StubAnswer SynthScore(const StubModelConfig& config, const FeatureVector& features,
                      std::mt19937_64& rng) {
  double draw = Uniform(rng);
  return SynthScore(config, features, draw, false, rng);
}

StubAnswer SynthScore(const StubModelConfig& config, const FeatureVector& features,
                      double accuracy_draw, bool force_wrong, std::mt19937_64& rng) {
  StubAnswer answer;
  answer.correct = !force_wrong && accuracy_draw < config.accuracy;
  std::string truth = config.truth.Label(features);
  std::string label = answer.correct ? truth : config.truth.Other(truth);

  double c = config.fixed_confidence
                 ? *config.fixed_confidence
                 : SampleBeta(answer.correct ? config.correct_confidence : config.wrong_confidence,
                              rng);
  c = std::max(c, 1.0 - c);
  double label_u = 1.0 - c;
  double other_u = std::max(c, std::nextafter(label_u, 2.0));
  answer.predictions = {{label, label_u}, {config.truth.Other(label), other_u}};

  double jitter = config.latency_jitter_ms * (2.0 * Uniform(rng) - 1.0);
  answer.latency_ms = std::max(0.0, config.latency_mean_ms + jitter);
  answer.failed = config.failure_rate > 0.0 && Uniform(rng) < config.failure_rate;
  return answer;
}

uint64_t DeriveSeed(uint64_t seed, std::string_view label) {
  return SplitMix64(seed ^ Fnv1a64("", label));
}

uint64_t RequestIndex(std::string_view request_id) {
  size_t end = request_id.size();
  size_t begin = end;
  while (begin > 0 && request_id[begin - 1] >= '0' && request_id[begin - 1] <= '9') --begin;
  uint64_t n = 0;
  for (size_t i = begin; i < end && i < begin + 18; ++i) n = n * 10 + (request_id[i] - '0');
  return n;
}

StubModel::StubModel(StubModelConfig config, uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
  config_.Validate();
}

StubAnswer StubModel::Answer(const ScoreRequest& request) const {
  std::mt19937_64 shared(DeriveSeed(seed_, "accuracy/" + request.request_id));
  double accuracy_draw = Uniform(shared);
  uint64_t index = RequestIndex(request.request_id);
  bool forced = std::any_of(config_.forced_errors.begin(), config_.forced_errors.end(),
                            [&](const ErrorSchedule& s) { return s.Hits(index); });
  std::mt19937_64 own(
      DeriveSeed(seed_, config_.model_id.ToString() + "/" + request.request_id));
  return SynthScore(config_, request.features, accuracy_draw, forced, own);
}

BackendResult StubModel::Score(const ScoreRequest& request, std::chrono::milliseconds) {
  StubAnswer answer = Answer(request);
  if (answer.failed) {
    return BackendResult::Failure("STUB_FAILURE", "injected failure", answer.latency_ms);
  }
  ScoreResponse response;
  response.request_id = request.request_id;
  response.served_by = config_.model_id;
  response.predictions = std::move(answer.predictions);
  response.latency_ms = answer.latency_ms;
  return BackendResult::Ok(std::move(response), answer.latency_ms);
}

bool StubModel::Feedback(const FeedbackRecord&) {
  ++feedback_received_;
  return true;
}

}  // namespace modelgate::harness
