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

#ifndef MODELGATE_HARNESS_STUB_MODEL_H_
#define MODELGATE_HARNESS_STUB_MODEL_H_

#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "modelgate/backend.h"
#include "modelgate/protocol.h"

namespace modelgate::harness {

// Ground truth: `positive` iff w.x + b > 0.
struct TruthRule {
  std::vector<double> weights;
  double bias = 0.0;
  std::string positive = "pos";
  std::string negative = "neg";

  std::string Label(const FeatureVector& features) const;
  const std::string& Other(const std::string& label) const;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

// Requests with index in [from, to] and (index - from + 1) % every == 0 are
// answered wrongly regardless of accuracy.
struct ErrorSchedule {
  uint64_t from = 0;
  uint64_t to = 0;
  uint64_t every = 1;

  bool Hits(uint64_t index) const;
};

struct StubModelConfig {
  ModelId model_id;
  TruthRule truth;
  double accuracy = 1.0;
  // When set, every answer carries this confidence; otherwise it is drawn
  // from the Beta matching the answer's correctness.
  std::optional<double> fixed_confidence;
  BetaParams correct_confidence{8.0, 2.0};
  BetaParams wrong_confidence{2.0, 2.0};
  double latency_mean_ms = 10.0;
  double latency_jitter_ms = 0.0;
  double failure_rate = 0.0;
  std::vector<ErrorSchedule> forced_errors;

  void Validate() const;  // throws kConfigError
};

struct StubAnswer {
  bool failed = false;
  bool correct = false;
  std::vector<Prediction> predictions;  // emitted label first
  double latency_ms = 0.0;
};

// Draws beta(alpha, beta) through two gamma variates.
double SampleBeta(const BetaParams& params, std::mt19937_64& rng);

// Single draw: correct with probability `accuracy` using `rng` for every
// random choice. Two predictions, the emitted label and its complement; the
// confidence is folded into [0.5, 1] so the emitted label stays top-1.
StubAnswer SynthScore(const StubModelConfig& config, const FeatureVector& features,
                      std::mt19937_64& rng);

// Same, with the correctness draw supplied by the caller. Stubs of one
// scenario share that draw per request, so their errors are nested rather
// than independent.
StubAnswer SynthScore(const StubModelConfig& config, const FeatureVector& features,
                      double accuracy_draw, bool force_wrong, std::mt19937_64& rng);

// splitmix64 of seed xor FNV-1a(label).
uint64_t DeriveSeed(uint64_t seed, std::string_view label);

// Trailing decimal digits of a request id ("req-000042" -> 42), or 0.
uint64_t RequestIndex(std::string_view request_id);

// In-process model microservice. Every random choice is keyed by
// (seed, request_id), so answers do not depend on call order.
class StubModel : public Backend {
 public:
  StubModel(StubModelConfig config, uint64_t seed);

  BackendResult Score(const ScoreRequest& request, std::chrono::milliseconds deadline) override;
  bool Feedback(const FeedbackRecord& feedback) override;

  StubAnswer Answer(const ScoreRequest& request) const;
  const StubModelConfig& config() const { return config_; }
  uint64_t feedback_received() const { return feedback_received_.load(); }

 private:
  StubModelConfig config_;
  uint64_t seed_;
  std::atomic<uint64_t> feedback_received_{0};
};

}  // namespace modelgate::harness

#endif  // MODELGATE_HARNESS_STUB_MODEL_H_
