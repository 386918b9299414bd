// Copyright 2026 The Carryover Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "carryover/adaptation.h"
#include "carryover/engine.h"
#include "carryover/harness.h"
#include "carryover/model_io.h"
#include "carryover/pipeline.h"
#include "carryover/report.h"
#include "support.h"

namespace carryover {
namespace {

using ::carryover::testing::FixturePath;

// Counts calls and can fail after a number of actions.
class CountingDriver : public Driver {
 public:
  CountingDriver(Driver& inner, int failAfter = -1)
      : inner_(inner), failAfter_(failAfter) {}
  StepResult Reset() override {
    Tick();
    return inner_.Reset();
  }
  Observation Current() const override { return inner_.Current(); }
  StepResult Perform(const Action& a) override {
    Tick();
    return inner_.Perform(a);
  }
  int calls() const { return calls_; }

 private:
  void Tick() {
    if (failAfter_ >= 0 && calls_ >= failAfter_) {
      throw DriverError("device went away");
    }
    ++calls_;
  }
  Driver& inner_;
  int failAfter_;
  int calls_ = 0;
};

SessionResult RunFixture(const std::string& fixture, size_t version, int budget,
                  unsigned long long seed, const AppModel* model = nullptr) {
  AppSpec spec = LoadSpec(FixturePath(fixture));
  PipelineConfig c;
  c.budget = budget;
  c.seed = seed;
  AppModel m = model != nullptr ? *model : ExportModel(spec, version);
  return TestVersion(m, spec, version, TargetsFor(spec, version), c);
}

void ExpectUtaInvariants(const SessionResult& r) {
  InstructionSet uni;
  for (const auto& u : r.utas) {
    EXPECT_GT(u.newlyCoveredInstructionCount, 0);
    EXPECT_EQ(u.newlyCoveredInstructionCount, CountInstructions(u.newlyCovered));
    for (const auto& [m, ins] : u.newlyCovered) {
      for (int i : ins) EXPECT_TRUE(uni[m].insert(i).second) << m << ":" << i;
    }
  }
  EXPECT_EQ(CountInstructions(uni), r.ledger.CoveredInstructions());
  for (const auto& [m, ins] : r.ledger.covered()) {
    EXPECT_EQ(uni[m], ins) << m;
  }
  int gaining = 0;
  for (const auto& n : r.ledger.newlyCovered()) gaining += !n.empty();
  EXPECT_EQ(static_cast<size_t>(gaining), r.utas.size());
}

TEST(CoverageLedger, RecordsOnlyFreshTargetInstructions) {
  TargetSet t;
  t.methodIds = {"A.f"};
  t.instructionCounts = {{"A.f", 4}};
  EXPECT_EQ(t.TotalInstructions(), 4);
  CoverageLedger ledger(t);
  auto first = ledger.Record({{"A.f", {1, 2}}, {"B.g", {1}}});
  EXPECT_EQ(first, (InstructionSet{{"A.f", {1, 2}}}));
  auto second = ledger.Record({{"A.f", {2, 3}}});
  EXPECT_EQ(second, (InstructionSet{{"A.f", {3}}}));
  EXPECT_EQ(ledger.CoveredInstructions(), 3);
  EXPECT_DOUBLE_EQ(ledger.InstructionCoverage(), 75.0);
  // A method counts once any of its instructions ran.
  EXPECT_DOUBLE_EQ(ledger.MethodCoverage(), 100.0);
  EXPECT_EQ(ledger.CoveredMethods(), 1);
  EXPECT_EQ(ledger.executed().size(), 2u);
  EXPECT_DOUBLE_EQ(CoverageLedger().InstructionCoverage(), 0.0);
}

TEST(Session, ZeroBudgetLeavesTheDriverAlone) {
  AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
  SimDriver sim(spec, 0, 1);
  CountingDriver driver(sim);
  EngineConfig c;
  c.budget = 0;
  SessionResult r = RunSession(ExportModel(spec, 0), TargetsFor(spec, 0), driver, c);
  EXPECT_EQ(driver.calls(), 0);
  EXPECT_EQ(r.executedActions, 0);
  EXPECT_TRUE(r.model.gstg.empty());
  EXPECT_TRUE(r.utas.empty());
  EXPECT_FALSE(r.aborted);
}

TEST(Session, SingleWindowAppIsFullyCovered) {
  SessionResult r = RunFixture("single_window.appspec.json", 0, 30, 4);
  EXPECT_EQ(r.executedActions, 30);
  EXPECT_DOUBLE_EQ(r.ledger.InstructionCoverage(), 100.0);
  ASSERT_TRUE(r.actionsToFirstTargetCoverage.has_value());
  ExpectUtaInvariants(r);
  EXPECT_TRUE(ValidateIntegrity(r.model).empty());
}

TEST(Session, BudgetAndTraceAgree) {
  for (int budget : {1, 7, 60}) {
    SessionResult r = RunFixture("diary.appspec.json", 0, budget, 2);
    EXPECT_EQ(r.executedActions, budget);
    EXPECT_EQ(r.model.gstg.actions.size(), static_cast<size_t>(budget));
    EXPECT_EQ(r.model.gstg.guiTrees.size(), static_cast<size_t>(budget) + 1);
    EXPECT_EQ(r.actionPhases.size(), static_cast<size_t>(budget));
    EXPECT_EQ(r.steps.size(), static_cast<size_t>(budget));
    for (const auto& t : r.model.gstg.guiTrees) {
      EXPECT_NE(r.model.dstg.FindState(t.abstractStateId), nullptr);
    }
  }
}

TEST(Session, UtaInvariantsOnEveryFixture) {
  for (const char* f : {"diary.appspec.json", "dialog_memory.appspec.json",
                        "news.appspec.json", "deep_target.appspec.json",
                        "single_window.appspec.json"}) {
    SCOPED_TRACE(f);
    SessionResult r = RunFixture(f, 0, 150, 3);
    ExpectUtaInvariants(r);
    EXPECT_LT(r.utas.size() * 5, static_cast<size_t>(r.executedActions));
  }
}

TEST(Session, SameSeedSameReport) {
  SessionResult a = RunFixture("dialog_memory.appspec.json", 0, 70, 9);
  SessionResult b = RunFixture("dialog_memory.appspec.json", 0, 70, 9);
  EXPECT_EQ(EmitReport(a).dump(), EmitReport(b).dump());
  EXPECT_EQ(SerializeModel(a.model), SerializeModel(b.model));
}

TEST(Session, DriverFailureAbortsCleanly) {
  AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
  SimDriver sim(spec, 0, 1);
  CountingDriver driver(sim, 10);
  EngineConfig c;
  c.budget = 50;
  c.seed = 1;
  SessionResult r = RunSession(ExportModel(spec, 0), TargetsFor(spec, 0), driver, c);
  EXPECT_TRUE(r.aborted);
  EXPECT_FALSE(r.abortReason.empty());
  EXPECT_LT(r.executedActions, 10);
  EXPECT_TRUE(ValidateIntegrity(r.model).empty());
}

TEST(Session, PhasesRunInOrder) {
  SessionResult r = RunFixture("deep_target.appspec.json", 0, 120, 5);
  int last = 0;
  for (int p : r.actionPhases) {
    EXPECT_GE(p, last);
    EXPECT_GE(p, 1);
    EXPECT_LE(p, 4);
    last = p;
  }
}

TEST(Session, ReuseStartsFromInheritedKnowledge) {
  AppSpec spec = LoadSpec(FixturePath("deep_target.appspec.json"));
  PipelineConfig c;
  c.budget = 150;
  c.seed = 1;
  SessionResult v1 = TestVersion(ExportModel(spec, 0), spec, 0, TargetsFor(spec, 0), c);
  Ewtg e2 = ExportEwtg(spec, 1);
  AppModel adapted = AdaptModel(v1.model, e2, DiffEwtgs(v1.model.ewtg, e2), "v2");
  ASSERT_FALSE(adapted.dstg.abstractTransitions.empty());
  SessionResult v2 = TestVersion(adapted, spec, 1, TargetsFor(spec, 1), c);
  EXPECT_FALSE(v2.aborted);
  int inherited = 0;
  for (const auto& s : v2.steps) {
    if (s.planned && s.abstractTransitionId &&
        adapted.dstg.FindTransition(*s.abstractTransitionId) != nullptr) {
      ++inherited;
    }
    if (s.expectedStateId && s.outcome == Outcome::kAsExpected) {
      EXPECT_EQ(*s.expectedStateId, s.observedStateId);
    }
  }
  EXPECT_GT(inherited, 0);
  ASSERT_TRUE(v2.actionsToFirstTargetCoverage.has_value());
  SessionResult cold = TestVersion(ExportModel(spec, 1), spec, 1, TargetsFor(spec, 1), c);
  ASSERT_TRUE(cold.actionsToFirstTargetCoverage.has_value());
  EXPECT_LT(*v2.actionsToFirstTargetCoverage, *cold.actionsToFirstTargetCoverage);
  EXPECT_DOUBLE_EQ(v2.ledger.InstructionCoverage(), 100.0);
}

}  // namespace
}  // namespace carryover
