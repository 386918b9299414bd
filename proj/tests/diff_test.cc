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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "carryover/diff.h"
#include "carryover/harness.h"
#include "support.h"

namespace carryover {
namespace {

using ::carryover::testing::FixturePath;

// Textbook edit distance, kept separate from the library's.
int EditDistance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

TEST(Similarity, Levenshtein) {
  EXPECT_DOUBLE_EQ(LevenshteinRatio("x", "x"), 1.0);
  EXPECT_DOUBLE_EQ(LevenshteinRatio("", ""), 1.0);
  EXPECT_DOUBLE_EQ(LevenshteinRatio("", "abc"), 0.0);
  EXPECT_NEAR(LevenshteinRatio("MainActivity", "HomeActivity"), 2.0 / 3, 1e-12);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    std::string a(rng() % 8, 'a');
    std::string b(rng() % 8, 'a');
    for (auto& c : a) c = static_cast<char>('a' + rng() % 3);
    for (auto& c : b) c = static_cast<char>('a' + rng() % 3);
    const double want =
        a.empty() && b.empty()
            ? 1.0
            : 1.0 - static_cast<double>(EditDistance(a, b)) /
                        static_cast<double>(std::max(a.size(), b.size()));
    EXPECT_NEAR(LevenshteinRatio(a, b), want, 1e-12) << a << " " << b;
    EXPECT_DOUBLE_EQ(LevenshteinRatio(a, b), LevenshteinRatio(b, a));
  }
}

TEST(Similarity, Xpath) {
  EXPECT_DOUBLE_EQ(XpathSimilarity("a/b/c", "a/b/c"), 1.0);
  EXPECT_NEAR(XpathSimilarity("a/b/c", "a/b"), 2 / std::sqrt(6.0), 1e-12);
  EXPECT_DOUBLE_EQ(XpathSimilarity("a/b", "c/d"), 0.0);
  // Counts matter: (2,1) . (1,1) / (sqrt 5 * sqrt 2).
  EXPECT_NEAR(XpathSimilarity("a/a/b", "a/b"), 3 / std::sqrt(10.0), 1e-12);
  EXPECT_EQ(SimpleClassName("android.widget.Button"), "Button");
  EXPECT_EQ(SimpleClassName("Button"), "Button");
}

class DiaryDiff : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_ = LoadSpec(FixturePath("diary.appspec.json"));
    base_ = ExportEwtg(spec_, 0);
    updated_ = ExportEwtg(spec_, 1);
  }
  AppSpec spec_;
  Ewtg base_;
  Ewtg updated_;
};

TEST_F(DiaryDiff, ReportsTheExpectedChanges) {
  DiffResult d = DiffEwtgs(base_, updated_);
  EXPECT_EQ(d.windows.replaced,
            (std::map<std::string, std::string>{{"MainActivity", "HomeActivity"}}));
  EXPECT_TRUE(d.windows.added.empty());
  EXPECT_TRUE(d.windows.deleted.empty());
  EXPECT_EQ(d.widgets.replaced, (std::map<std::string, std::string>{{"w3", "w8"}}));
  EXPECT_EQ(d.widgets.deleted, std::vector<std::string>{"w7"});
  EXPECT_EQ(d.widgets.added, std::vector<std::string>{"w9"});
  EXPECT_TRUE(d.transitions.replaced.empty());
  EXPECT_TRUE(d.transitions.deleted.empty());
  ASSERT_EQ(d.transitions.added.size(), 1u);
  const WindowTransition* t = updated_.FindTransition(d.transitions.added[0]);
  ASSERT_NE(t, nullptr);
  const Input* in = updated_.FindInput(t->inputId);
  ASSERT_NE(in, nullptr);
  EXPECT_EQ(in->widgetId, "w9");
  EXPECT_EQ(d.AddedOrReplacedUpdatedWidgets(), (std::set<WidgetId>{"w8", "w9"}));
}

TEST_F(DiaryDiff, SelfDiffIsEmpty) {
  EXPECT_TRUE(DiffEwtgs(base_, base_).Empty());
  EXPECT_TRUE(DiffEwtgs(updated_, updated_).Empty());
}

TEST_F(DiaryDiff, JsonRoundTrip) {
  DiffResult d = DiffEwtgs(base_, updated_);
  EXPECT_EQ(DiffFromJson(ToJson(d)), d);
}

TEST(Rcv, StructureAndRuntimeExclusion) {
  AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
  Ewtg e = ExportEwtg(spec, 0);
  RcvModel rcv = EwtgToRcv(e);
  auto windows = rcv.OfKind(std::string(kWindowElement));
  ASSERT_EQ(windows.size(), 2u);
  EXPECT_EQ(rcv.roots.size(), 2u);
  EXPECT_NE(rcv.Find(kWindowElement, "MainActivity"), nullptr);

  e.windows.push_back({"Popup", "Popup", WindowKind::kDialog, "app.Popup", true, {}});
  EXPECT_EQ(EwtgToRcv(e).OfKind(std::string(kWindowElement)).size(), 2u);
  EXPECT_TRUE(EwtgToRcv(Ewtg{}).elements.empty());
}

// Applies random edits to an EWTG so the diff has something to find.
Ewtg Mutate(const Ewtg& in, std::mt19937_64& rng) {
  Ewtg e = in;
  for (auto& w : e.windows) {
    if (rng() % 4 == 0) w.name += "X";
  }
  for (auto& w : e.widgets) {
    switch (rng() % 6) {
      case 0: w.className = "android.widget.ImageView"; break;
      case 1: w.resourceId += "_v2"; break;
      case 2: w.resourceId = "zzzzzzzzzz"; w.xpath = "q/r/s"; break;
      default: break;
    }
  }
  if (!e.widgets.empty() && rng() % 2 == 0) {
    const WidgetId gone = e.widgets[rng() % e.widgets.size()].id;
    std::erase_if(e.widgets, [&](const EwtgWidget& w) { return w.id == gone; });
    for (auto& w : e.windows) w.widgetIds.erase(gone);
    std::set<InputId> dead;
    for (const auto& i : e.inputs) {
      if (i.widgetId == gone) dead.insert(i.id);
    }
    std::erase_if(e.inputs, [&](const Input& i) { return dead.contains(i.id); });
    std::erase_if(e.windowTransitions, [&](const WindowTransition& t) {
      return dead.contains(t.inputId);
    });
  }
  return e;
}

void ExpectPartition(const Ewtg& base, const Ewtg& updated, const DiffResult& d) {
  auto check = [](const std::vector<std::string>& base_ids,
                   const std::vector<std::string>& updated_ids,
                   const ElementDiff& e) {
    std::map<std::string, int> seen_base;
    std::map<std::string, int> seen_updated;
    for (const auto& id : e.deleted) ++seen_base[id];
    for (const auto& id : e.added) ++seen_updated[id];
    for (const auto& [b, u] : e.replaced) {
      ++seen_base[b];
      ++seen_updated[u];
    }
    for (const auto& [b, u] : e.matched) {
      ++seen_base[b];
      ++seen_updated[u];
    }
    for (const auto& id : base_ids) EXPECT_EQ(seen_base[id], 1) << id;
    for (const auto& id : updated_ids) EXPECT_EQ(seen_updated[id], 1) << id;
    EXPECT_EQ(seen_base.size(), base_ids.size());
    EXPECT_EQ(seen_updated.size(), updated_ids.size());
  };
  auto ids = [](const auto& v) {
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.runtimeCreated) out.push_back(x.id);
    }
    return out;
  };
  check(ids(base.windows), ids(updated.windows), d.windows);
  check(ids(base.widgets), ids(updated.widgets), d.widgets);
  check(ids(base.windowTransitions), ids(updated.windowTransitions),
        d.transitions);
}

TEST(DiffProperties, PartitionSelfDiffAndMonotonicity) {
  std::mt19937_64 rng(5);
  std::vector<std::pair<Ewtg, Ewtg>> pairs;
  AppSpec spec = LoadSpec(FixturePath("diary.appspec.json"));
  pairs.emplace_back(ExportEwtg(spec, 0), ExportEwtg(spec, 1));
  for (int k = 0; k < 60; ++k) {
    Ewtg base = testing::RandomPlanningModel(rng, 6).ewtg;
    pairs.emplace_back(base, Mutate(base, rng));
  }
  for (const auto& [base, updated] : pairs) {
    EXPECT_TRUE(DiffEwtgs(base, base).Empty());
    DiffResult d = DiffEwtgs(base, updated);
    ExpectPartition(base, updated, d);
    size_t last = SIZE_MAX;
    for (double th : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      DiffConfig c;
      c.levenshteinThreshold = th;
      DiffResult dt = DiffEwtgs(base, updated, c);
      ExpectPartition(base, updated, dt);
      const size_t replaced = dt.windows.replaced.size() +
                              dt.widgets.replaced.size() +
                              dt.transitions.replaced.size();
      EXPECT_LE(replaced, last) << "threshold " << th;
      last = replaced;
    }
  }
}

Ewtg OneWindow() {
  Ewtg e;
  e.windows.push_back({"A", "Main", WindowKind::kActivity, "app.Main", false,
                       {"p1", "p2", "x"}});
  e.widgets.push_back({"p1", "A", "android.widget.LinearLayout", "left", "",
                       "android.widget.FrameLayout/android.widget.LinearLayout",
                       std::nullopt, false});
  e.widgets.push_back({"p2", "A", "android.widget.LinearLayout", "right", "",
                       "android.widget.FrameLayout/android.widget.LinearLayout",
                       std::nullopt, false});
  e.widgets.push_back({"x", "A", "android.widget.Button", "ok", "",
                       "android.widget.FrameLayout/android.widget.LinearLayout/"
                       "android.widget.Button",
                       "p1", false});
  return e;
}

TEST(Correspondence, ParentMoveIsAReplacement) {
  Ewtg base = OneWindow();
  Ewtg updated = OneWindow();
  updated.widgets[2].id = "y";
  updated.widgets[2].parentId = "p2";
  updated.windows[0].widgetIds = {"p1", "p2", "y"};
  DiffResult d = DiffEwtgs(base, updated);
  EXPECT_EQ(d.widgets.replaced, (std::map<std::string, std::string>{{"x", "y"}}));
  EXPECT_TRUE(d.widgets.added.empty());
  EXPECT_TRUE(d.widgets.deleted.empty());
}

TEST(Correspondence, OneToOneUnderTies) {
  Ewtg base = OneWindow();
  Ewtg updated = OneWindow();
  // Two identical candidates for x.
  EwtgWidget twin = updated.widgets[2];
  twin.id = "x2";
  updated.widgets.push_back(twin);
  updated.windows[0].widgetIds.insert("x2");
  DiffResult d = DiffEwtgs(base, updated);
  std::set<std::string> targets;
  for (const auto& [b, u] : d.widgets.matched) targets.insert(u);
  for (const auto& [b, u] : d.widgets.replaced) targets.insert(u);
  EXPECT_EQ(targets.size(), 3u);
  EXPECT_EQ(d.widgets.added.size(), 1u);
  ExpectPartition(base, updated, d);
}

}  // namespace
}  // namespace carryover
