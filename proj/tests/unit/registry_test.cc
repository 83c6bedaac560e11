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

#include "modelgate/registry.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "../test_util.h"
#include "modelgate/error.h"

namespace modelgate {
namespace {

using testing::Id;
using testing::ManualClock;
using testing::Notification;

class CountingSink : public StageAuditSink {
 public:
  void RecordStageChange(const StageChange& change) override { changes.push_back(change); }
  std::vector<StageChange> changes;
};

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kStorageFailure;
}

class RegistryTest : public ::testing::Test {
 protected:
  RegistryTest() : registry_(clock_.fn()) { registry_.SetAuditSink(&sink_); }

  ManualClock clock_;
  Registry registry_;
  CountingSink sink_;
};

TEST_F(RegistryTest, RegisterStoresRegisteredRecord) {
  ModelRecord r = registry_.Register(Notification(Id("svc", 1)));
  EXPECT_EQ(r.stage, Stage::kRegistered);
  EXPECT_EQ(r.deployment_id, "depl-id:svc-1");
  EXPECT_FALSE(r.deployed_at);
  EXPECT_EQ(registry_.Get(Id("svc", 1)), r);
  EXPECT_FALSE(registry_.HasChampion("svc"));
}

TEST_F(RegistryTest, RejectsDuplicatesAndBrokenLineage) {
  registry_.Register(Notification(Id("svc", 1)));
  EXPECT_EQ(CodeOf([&] { registry_.Register(Notification(Id("svc", 1))); }),
            ErrorCode::kDuplicateVersion);
  EXPECT_EQ(CodeOf([&] { registry_.Register(Notification(Id("svc", 3), Id("svc", 2))); }),
            ErrorCode::kLineageViolation);
  EXPECT_EQ(CodeOf([&] { registry_.Register(Notification(Id("svc", 2), Id("svc", 5))); }),
            ErrorCode::kLineageViolation);
  EXPECT_EQ(CodeOf([&] { registry_.Register(Notification(Id("svc", 2), Id("other", 1))); }),
            ErrorCode::kLineageViolation);
}

// Lineage edges always point to a strictly smaller version of the same
// service, so no insertion order can close a cycle.
TEST_F(RegistryTest, LineageStaysAcyclicUnderRandomInsertions) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    uint32_t v = 1 + rng() % 60;
    std::optional<ModelId> based;
    if (rng() % 3) based = Id("svc", 1 + rng() % 60);
    try {
      registry_.Register(Notification(Id("svc", v), based));
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kDuplicateVersion ||
                  e.code() == ErrorCode::kLineageViolation ||
                  e.code() == ErrorCode::kInvariantViolation);
    }
  }
  for (const auto& r : registry_.List("svc")) {
    std::set<ModelId> seen;
    std::optional<ModelId> cur = r.id;
    while (cur) {
      ASSERT_TRUE(seen.insert(*cur).second) << "cycle through " << *cur;
      cur = registry_.Get(*cur).based_on;
    }
  }
}

TEST_F(RegistryTest, StateMachineEdges) {
  TransitionContext staged;
  EXPECT_TRUE(IsLegalTransition(Stage::kRegistered, Stage::kShadow, staged));
  EXPECT_TRUE(IsLegalTransition(Stage::kShadow, Stage::kCanary, staged));
  EXPECT_TRUE(IsLegalTransition(Stage::kCanary, Stage::kThresholded, staged));
  EXPECT_TRUE(IsLegalTransition(Stage::kThresholded, Stage::kFull, staged));
  EXPECT_TRUE(IsLegalTransition(Stage::kFull, Stage::kFallback, staged));
  EXPECT_FALSE(IsLegalTransition(Stage::kCanary, Stage::kShadow, staged));
  EXPECT_FALSE(IsLegalTransition(Stage::kShadow, Stage::kFull, staged));
  EXPECT_FALSE(IsLegalTransition(Stage::kRegistered, Stage::kFull, staged));
  EXPECT_FALSE(IsLegalTransition(Stage::kRetired, Stage::kRetired, staged));
  for (Stage s : {Stage::kRegistered, Stage::kShadow, Stage::kCanary, Stage::kThresholded,
                  Stage::kFull, Stage::kFallback}) {
    EXPECT_TRUE(IsLegalTransition(s, Stage::kRetired, staged)) << StageName(s);
  }
  TransitionContext first{.has_champion = false};
  EXPECT_TRUE(IsLegalTransition(Stage::kRegistered, Stage::kFull, first));
  TransitionContext direct{.require_staging = false};
  EXPECT_TRUE(IsLegalTransition(Stage::kRegistered, Stage::kFull, direct));
}

TEST_F(RegistryTest, SetStageEnforcesEdgesAndAuditsEachChange) {
  registry_.Register(Notification(Id("svc", 1)));
  registry_.SetStage(Id("svc", 1), Stage::kFull, "initial");
  registry_.Register(Notification(Id("svc", 2), Id("svc", 1)));
  registry_.SetStage(Id("svc", 2), Stage::kShadow, "start");
  registry_.SetStage(Id("svc", 2), Stage::kCanary, "ok");
  EXPECT_EQ(CodeOf([&] { registry_.SetStage(Id("svc", 2), Stage::kShadow, "back"); }),
            ErrorCode::kIllegalTransition);
  registry_.SetStage(Id("svc", 2), Stage::kThresholded, "ok");
  registry_.SetStage(Id("svc", 2), Stage::kFull, "done");
  EXPECT_EQ(registry_.Get(Id("svc", 1)).stage, Stage::kFallback);
  EXPECT_EQ(sink_.changes.size(), registry_.stage_change_count());
  EXPECT_EQ(sink_.changes.size(), 6u);  // incl. the champion demotion
  EXPECT_EQ(CodeOf([&] { registry_.SetStage(Id("svc", 9), Stage::kShadow, "x"); }),
            ErrorCode::kUnknownModel);
}

TEST_F(RegistryTest, ResolveChainReflectsStages) {
  EXPECT_EQ(CodeOf([&] { registry_.ResolveChain("svc"); }), ErrorCode::kNoChampion);
  registry_.Register(Notification(Id("svc", 1)));
  registry_.SetStage(Id("svc", 1), Stage::kFull, "initial");
  registry_.Register(Notification(Id("svc", 2), Id("svc", 1)));
  registry_.SetStage(Id("svc", 2), Stage::kShadow, "start");
  ActiveChain c = registry_.ResolveChain("svc");
  EXPECT_EQ(c.champion, Id("svc", 1));
  ASSERT_TRUE(c.challenger);
  EXPECT_EQ(*c.challenger, Id("svc", 2));
  EXPECT_EQ(c.challenger_stage, Stage::kShadow);
  EXPECT_EQ(c.shadows, std::vector<ModelId>{Id("svc", 2)});
  EXPECT_FALSE(c.fallback);
  registry_.SetStage(Id("svc", 2), Stage::kCanary, "ok");
  c = registry_.ResolveChain("svc");
  EXPECT_EQ(c.challenger_stage, Stage::kCanary);
  EXPECT_TRUE(c.shadows.empty());
}

TEST_F(RegistryTest, DeployedAtSetWhenLeavingRegistered) {
  registry_.Register(Notification(Id("svc", 1)));
  clock_.Advance(std::chrono::seconds(30));
  registry_.SetStage(Id("svc", 1), Stage::kFull, "initial");
  ModelRecord r = registry_.Get(Id("svc", 1));
  ASSERT_TRUE(r.deployed_at);
  EXPECT_EQ(*r.deployed_at, clock_.now());
  EXPECT_EQ(r.history.size(), 1u);
}

TEST_F(RegistryTest, EventLogReplaysToEqualState) {
  auto dir = std::filesystem::temp_directory_path() / "mg_registry_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto path = dir / "registry.jsonl";
  {
    Registry r(clock_.fn());
    r.AttachEventLog(path);
    VersionNotification n = Notification(Id("svc", 1));
    n.test_id = "test-id:1";
    r.Register(n, {.deployment_id = "depl-id:x"});
    r.SetStage(Id("svc", 1), Stage::kFull, "initial");
    r.Register(Notification(Id("svc", 2), Id("svc", 1)));
    r.SetStage(Id("svc", 2), Stage::kShadow, "start");
    registry_.AttachEventLog(dir / "unused.jsonl");
  }
  Registry replayed(clock_.fn());
  replayed.AttachEventLog(path);
  EXPECT_EQ(replayed.List().size(), 2u);
  EXPECT_EQ(replayed.Get(Id("svc", 1)).deployment_id, "depl-id:x");
  EXPECT_EQ(replayed.Get(Id("svc", 1)).test_id, "test-id:1");
  EXPECT_EQ(replayed.Get(Id("svc", 2)).stage, Stage::kShadow);
  EXPECT_EQ(replayed.Get(Id("svc", 2)).history.size(), 1u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace modelgate
