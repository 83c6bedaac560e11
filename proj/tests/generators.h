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

#ifndef MODELGATE_TESTS_GENERATORS_H_
#define MODELGATE_TESTS_GENERATORS_H_

#include <random>
#include <string>

#include "modelgate/protocol.h"
#include "modelgate/time.h"

// Random valid protocol messages for round-trip properties.
namespace modelgate::testing {

class MessageGen {
 public:
  explicit MessageGen(uint64_t seed) : rng_(seed) {}

  std::string Text(size_t max_len = 12) {
    static const std::string kAlphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.:/ \"\\";
    size_t n = 1 + Below(max_len);
    std::string s;
    for (size_t i = 0; i < n; ++i) s += kAlphabet[Below(kAlphabet.size())];
    if (Below(8) == 0) s += "\xc3\xa9";  // non-ASCII UTF-8
    return s;
  }

  std::string Service() {
    static const std::string kChars = "abcdefghijklmnopqrstuvwxyz0123456789-";
    size_t n = 1 + Below(10);
    std::string s;
    for (size_t i = 0; i < n; ++i) s += kChars[Below(kChars.size())];
    return s;
  }

  ModelId Model(const std::string& service) {
    return {service, static_cast<uint32_t>(2 + Below(100000))};
  }

  double Real() {
    switch (Below(4)) {
      case 0: return static_cast<double>(static_cast<int64_t>(Below(2000)) - 1000);
      case 1: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng_);
      case 2: return std::uniform_real_distribution<double>(-1, 1)(rng_) * 1e-12;
      default: return std::normal_distribution<double>(0, 1)(rng_);
    }
  }

  double Unit() {
    if (Below(10) == 0) return Below(2) ? 0.0 : 1.0;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }

  Timestamp Time() {
    int64_t ms = 1'000'000'000'000LL + static_cast<int64_t>(Below(4'000'000'000'000ULL));
    if (Below(2)) ms -= ms % 1000;
    return Timestamp(std::chrono::milliseconds(ms));
  }

  FeatureVector Features() {
    FeatureVector f;
    size_t n = Below(6);
    for (size_t i = 0; i < n; ++i) f.features.push_back({"f" + std::to_string(i) + Text(4), Real()});
    return f;
  }

  ScoreRequest Request() {
    return {Text(), Time(), Features()};
  }

  ScoreResponse Response() {
    ScoreResponse r;
    r.request_id = Text();
    r.served_by = Model(Service());
    size_t n = Below(4);
    for (size_t i = 0; i < n; ++i) r.predictions.push_back({"l" + std::to_string(i), Unit()});
    SortPredictions(r.predictions);
    if (r.predictions.empty() || Below(5) == 0) {
      r.status = ResponseStatus::kEscalated;
      r.escalation_id = "esc-" + std::to_string(Below(1000000));
    }
    r.latency_ms = Below(3) ? static_cast<double>(Below(1000)) : Unit() * 250.0;
    return r;
  }

  FeedbackRecord Feedback() {
    FeedbackRecord f;
    f.request_id = Text();
    f.verdict = Below(2) ? Verdict::kGood : Verdict::kBad;
    if (Below(2)) f.true_label = Text();
    f.timestamp = Time();
    return f;
  }

  VersionNotification Notification() {
    VersionNotification n;
    std::string service = Service();
    n.model_id = Model(service);
    if (Below(2)) n.based_on = ModelId{service, 1 + static_cast<uint32_t>(Below(n.model_id.version - 1))};
    n.related_to = "service-id:" + Service();
    n.endpoint = Below(2) ? "http://127.0.0.1:" + std::to_string(1024 + Below(60000))
                          : "inproc://" + Text();
    if (Below(2)) n.test_id = "test-id:" + Text();
    if (Below(2)) n.signed_off = Text();
    return n;
  }

  Message Any() {
    switch (Below(4)) {
      case 0: return Request();
      case 1: return Response();
      case 2: return Feedback();
      default: return Notification();
    }
  }

  uint64_t Below(uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace modelgate::testing

#endif  // MODELGATE_TESTS_GENERATORS_H_
