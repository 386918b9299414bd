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

#include <random>

#include <gtest/gtest.h>

#include "carryover/adaptation.h"
#include "carryover/diff.h"
#include "carryover/harness.h"
#include "carryover/model_io.h"
#include "support.h"

namespace carryover {
namespace {

using ::carryover::testing::FixturePath;

class DiaryAdaptation : public ::testing::Test {
 protected:
  void SetUp() override {
    base_ = LoadModel(FixturePath("diary_base_model.json"));
    AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
    updated_ = ExportEwtg(spec, 1);
    diff_ = DiffEwtgs(base_.ewtg, updated_);
  }
  AppModel base_;
  Ewtg updated_;
  DiffResult diff_;
};

TEST_F(DiaryAdaptation, MatchesGoldenModel) {
  AppModel got = AdaptModel(base_, updated_, diff_, "v2");
  AppModel golden = LoadModel(FixturePath("diary_adapted_golden.json"));
  EXPECT_EQ(got, golden);
  EXPECT_EQ(SerializeModel(got), SerializeModel(golden));
}

TEST_F(DiaryAdaptation, NamedEffects) {
  AppModel got = AdaptModel(base_, updated_, diff_, "v2");
  EXPECT_TRUE(ValidateIntegrity(got).empty());
  EXPECT_TRUE(got.gstg.empty());
  EXPECT_EQ(got.ewtg, updated_);
  const AbstractState* s1 = got.dstg.FindState("s1");
  const AbstractState* s2 = got.dstg.FindState("s2");
  ASSERT_NE(s1, nullptr);
  ASSERT_NE(s2, nullptr);
  EXPECT_EQ(s1->windowId, "HomeActivity");
  ASSERT_NE(s1->FindAvm("avm2"), nullptr);
  EXPECT_EQ(s1->FindAvm("avm2")->ewtgWidgetId, "w8");
  EXPECT_EQ(s2->FindAvm("avm5"), nullptr);
  EXPECT_NE(got.dstg.FindTransition("at1"), nullptr);
  for (const auto& s : got.dstg.abstractStates) {
    for (const auto& a : s.avms) EXPECT_NE(a.ewtgWidgetId, "w9");
  }
}

TEST_F(DiaryAdaptation, SurvivingTransitionsAreConservative) {
  AppModel got = AdaptModel(base_, updated_, diff_, "v2");
  for (const auto& t : got.dstg.abstractTransitions) {
    const AbstractState* s = got.dstg.FindState(t.sourceStateId);
    ASSERT_NE(s, nullptr);
    EXPECT_NE(got.ewtg.FindWindow(s->windowId), nullptr);
    if (t.sourceAvmId) {
      const Avm* a = s->FindAvm(*t.sourceAvmId);
      ASSERT_NE(a, nullptr);
      if (a->ewtgWidgetId) {
        EXPECT_NE(got.ewtg.FindWidget(*a->ewtgWidgetId), nullptr);
      }
    }
  }
}

TEST_F(DiaryAdaptation, DiffNamingUnknownElementsIsRejected) {
  DiffResult bad = diff_;
  bad.widgets.deleted.push_back("no_such_widget");
  EXPECT_THROW(AdaptModel(base_, updated_, bad, "v2"), AdaptationError);
}

TEST(Adaptation, EmptyDiffOnlyClearsTheTrace) {
  for (const char* name : {"diary_base_model.json", "planning_model.json"}) {
    AppModel m = LoadModel(FixturePath(name));
    m.gstg.guiTrees.push_back(GuiTree{"t1", m.ewtg.windows[0].id, GuiNode{},
                                      m.dstg.abstractStates[0].id, 0});
    DiffResult none = DiffEwtgs(m.ewtg, m.ewtg);
    ASSERT_TRUE(none.Empty());
    AppModel got = AdaptModel(m, m.ewtg, none, m.version);
    EXPECT_TRUE(got.gstg.empty());
    EXPECT_EQ(got.dstg, m.dstg);
    EXPECT_EQ(got.ewtg, m.ewtg);
  }
}

TEST(Adaptation, EmptyDstgStaysEmpty) {
  AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
  AppModel base = ExportModel(spec, 0);
  Ewtg updated = ExportEwtg(spec, 1);
  AppModel got = AdaptModel(base, updated, DiffEwtgs(base.ewtg, updated), "v2");
  EXPECT_TRUE(got.dstg.abstractStates.empty());
  EXPECT_TRUE(got.dstg.abstractTransitions.empty());
}

TEST(Adaptation, ReplacedWindowTransitionDropsItsAbstractTransitions) {
  AppModel base = LoadModel(FixturePath("diary_base_model.json"));
  DiffResult d = DiffEwtgs(base.ewtg, base.ewtg);
  // Pretend the save transition changed.
  const AbstractTransition* at2 = base.dstg.FindTransition("at2");
  ASSERT_NE(at2, nullptr);
  ASSERT_TRUE(at2->windowTransitionId.has_value());
  const TransitionId wt = *at2->windowTransitionId;
  d.transitions.matched.erase(wt);
  d.transitions.replaced[wt] = wt;
  AppModel got = AdaptModel(base, base.ewtg, d, "v1b");
  EXPECT_EQ(got.dstg.FindTransition("at2"), nullptr);
  EXPECT_NE(got.dstg.FindTransition("at1"), nullptr);
  EXPECT_NE(got.dstg.FindState("s1"), nullptr);
  EXPECT_NE(got.dstg.FindState("s2"), nullptr);
  EXPECT_TRUE(ValidateIntegrity(got).empty());
}

TEST(Adaptation, DeletingMoreNeverKeepsMore) {
  AppModel base = LoadModel(FixturePath("diary_base_model.json"));
  std::vector<WidgetId> widgets;
  for (const auto& w : base.ewtg.widgets) widgets.push_back(w.id);
  std::mt19937_64 rng(9);
  auto survivors = [&](const std::set<WidgetId>& gone) {
    Ewtg updated = base.ewtg;
    std::erase_if(updated.widgets,
                  [&](const EwtgWidget& w) { return gone.contains(w.id); });
    for (auto& w : updated.windows) {
      for (const auto& g : gone) w.widgetIds.erase(g);
    }
    std::set<InputId> dead;
    for (const auto& i : updated.inputs) {
      if (i.widgetId && gone.contains(*i.widgetId)) dead.insert(i.id);
    }
    std::erase_if(updated.inputs,
                  [&](const Input& i) { return dead.contains(i.id); });
    std::erase_if(updated.windowTransitions, [&](const WindowTransition& t) {
      return dead.contains(t.inputId);
    });
    AppModel m = AdaptModel(base, updated, DiffEwtgs(base.ewtg, updated), "v2");
    EXPECT_TRUE(ValidateIntegrity(m).empty());
    std::set<std::string> out;
    for (const auto& s : m.dstg.abstractStates) {
      out.insert(s.id);
      for (const auto& a : s.avms) out.insert(s.id + "/" + a.id);
    }
    for (const auto& t : m.dstg.abstractTransitions) out.insert(t.id);
    return out;
  };
  for (int k = 0; k < 30; ++k) {
    std::set<WidgetId> d1;
    std::set<WidgetId> d2;
    for (const auto& w : widgets) {
      const int r = static_cast<int>(rng() % 4);
      if (r == 0) d1.insert(w);
      if (r <= 1) d2.insert(w);
    }
    auto s1 = survivors(d1);
    auto s2 = survivors(d2);
    for (const auto& e : s2) EXPECT_TRUE(s1.contains(e)) << e;
  }
}

}  // namespace
}  // namespace carryover
