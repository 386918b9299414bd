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

#include "carryover/harness.h"
#include "carryover/model_io.h"
#include "carryover/offline.h"
#include "carryover/pipeline.h"
#include "support.h"

namespace carryover {
namespace {

using ::carryover::testing::FixturePath;

SessionResult Session(const AppSpec& spec, size_t version, int budget,
                      unsigned long long seed) {
  PipelineConfig c;
  c.budget = budget;
  c.seed = seed;
  return TestVersion(ExportModel(spec, version), spec, version,
                     TargetsFor(spec, version), c);
}

TEST(Prune, DropsUnvisitedStatesOfVisitedWindows) {
  AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
  SessionResult r = Session(spec, 0, 40, 1);
  AppModel m = r.model;
  AbstractState ghost = m.dstg.abstractStates.front();
  ghost.id = "ghost";
  ghost.avms.clear();
  m.dstg.abstractStates.push_back(ghost);
  AbstractTransition t;
  t.id = "ghost_t";
  t.sourceStateId = m.dstg.abstractStates.front().id;
  t.destinationStateId = "ghost";
  t.actionType = ActionType::kPressBack;
  t.provenanceVersion = "v1";
  m.dstg.abstractTransitions.push_back(t);
  // A state of a window this trace never saw stays.
  AbstractState elsewhere = ghost;
  elsewhere.id = "elsewhere";
  elsewhere.windowId = "Nowhere";
  m.dstg.abstractStates.push_back(elsewhere);

  AppModel pruned = PruneUnvisited(m);
  EXPECT_EQ(pruned.dstg.FindState("ghost"), nullptr);
  EXPECT_EQ(pruned.dstg.FindTransition("ghost_t"), nullptr);
  EXPECT_NE(pruned.dstg.FindState("elsewhere"), nullptr);
  for (const auto& tree : pruned.gstg.guiTrees) {
    EXPECT_NE(pruned.dstg.FindState(tree.abstractStateId), nullptr);
  }
  EXPECT_EQ(PruneUnvisited(r.model), r.model);
}

TEST(Replay, DeterministicAppFlagsNothing) {
  for (const char* f : {"diary.appspec.json", "deep_target.appspec.json",
                        "dialog_memory.appspec.json"}) {
    SCOPED_TRACE(f);
    AppSpec spec = LoadSpec(FixturePath(f));
    SessionResult r = Session(spec, 0, 60, 2);
    SimDriver replay(spec, 0, 2, 1);
    ReplayResult rr = ReplayFlagObsolete(PruneUnvisited(r.model), replay);
    EXPECT_TRUE(rr.flagged.empty());
    EXPECT_TRUE(rr.warnings.empty());
  }
}

TEST(Replay, LaunchVaryingContentIsFlagged) {
  AppSpec spec = LoadSpec(FixturePath("news.appspec.json"));
  SessionResult r = Session(spec, 0, 60, 3);
  ReplayResult rr = RefineVersion(r.model, spec, 0, PipelineConfig{.seed = 3});
  ASSERT_FALSE(rr.flagged.empty());
  std::set<StateId> news;
  for (const auto& t : r.model.gstg.guiTrees) {
    if (t.windowId == "News") news.insert(t.abstractStateId);
  }
  EXPECT_EQ(rr.flagged, news);
  for (const auto& id : rr.flagged) {
    EXPECT_TRUE(rr.model.dstg.FindState(id)->obsolete);
  }
}

TEST(Propagation, FlagsUnreachableNewStates) {
  AppModel m = LoadModel(FixturePath("diary_base_model.json"));
  AbstractState extra = *m.dstg.FindState("s2");
  extra.id = "s_new";
  m.dstg.abstractStates.push_back(extra);
  AbstractTransition in;
  in.id = "t_new";
  in.sourceStateId = "s1";
  in.destinationStateId = "s_new";
  in.actionType = ActionType::kLongClick;
  in.provenanceVersion = "v1";
  m.dstg.abstractTransitions.push_back(in);

  SessionObservations obs;
  obs.created = {"s_new"};
  obs.observations = {{"s_new", 1}};
  obs.failedTraversals = {{"t_new", 1}};
  obs.windowsWithFlags = {"EditActivity"};
  AppModel a = m;
  EXPECT_EQ(PropagateObsolescence(a, obs), (std::set<StateId>{"s_new"}));
  EXPECT_TRUE(a.dstg.FindState("s_new")->obsolete);

  // Outside a flagged window nothing happens.
  SessionObservations quiet = obs;
  quiet.windowsWithFlags.clear();
  AppModel b = m;
  EXPECT_TRUE(PropagateObsolescence(b, quiet).empty());

  // Seen twice, or one incoming transition still works: kept.
  SessionObservations seen = obs;
  seen.observations["s_new"] = 2;
  AppModel c = m;
  EXPECT_TRUE(PropagateObsolescence(c, seen).empty());
  SessionObservations working = obs;
  working.failedTraversals.clear();
  AppModel d = m;
  EXPECT_TRUE(PropagateObsolescence(d, working).empty());
}

}  // namespace
}  // namespace carryover
