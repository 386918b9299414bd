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

#include "carryover/model.h"
#include "carryover/model_io.h"
#include "support.h"

namespace carryover {
namespace {

using ::carryover::testing::FixturePath;

TEST(ModelIo, FixtureModelsRoundTrip) {
  for (const char* name : {"diary_base_model.json", "diary_adapted_golden.json",
                           "planning_model.json"}) {
    SCOPED_TRACE(name);
    AppModel m = LoadModel(FixturePath(name));
    EXPECT_TRUE(ValidateIntegrity(m).empty());
    const std::string text = SerializeModel(m);
    AppModel back = DeserializeModel(text);
    EXPECT_EQ(back, m);
    EXPECT_EQ(SerializeModel(back), text);
  }
}

TEST(ModelIo, RandomModelsRoundTrip) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    AppModel m = testing::RandomPlanningModel(rng, 12);
    EXPECT_EQ(DeserializeModel(SerializeModel(m)), m);
  }
}

TEST(ModelIo, DanglingReferenceIsRejected) {
  AppModel m = LoadModel(FixturePath("diary_base_model.json"));
  m.dstg.abstractTransitions.front().destinationStateId = "nowhere";
  EXPECT_FALSE(ValidateIntegrity(m).empty());
  try {
    SerializeModel(m);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_FALSE(e.violations().empty());
    EXPECT_NE(e.violations().front().find("nowhere"), std::string::npos);
  }
}

TEST(ModelIo, UnknownSchemaVersionIsRejected) {
  nlohmann::json doc = ToJson(LoadModel(FixturePath("planning_model.json")));
  doc["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(DeserializeModel(doc.dump()), VersionError);
}

TEST(ModelIo, MalformedTextIsAParseError) {
  EXPECT_THROW(DeserializeModel("{\"schema_version\": 1,"), ParseError);
  EXPECT_THROW(DeserializeModel("[]"), ParseError);
}

TEST(ModelIo, GuiNodePropertySetIsClosed) {
  GuiNode n;
  n.resourceId = "ok";
  n.className = "android.widget.Button";
  nlohmann::json doc = ToJson(n);
  EXPECT_EQ(GuiNodeFromJson(doc), n);

  nlohmann::json extra = doc;
  extra["properties"]["color"] = "red";
  EXPECT_THROW(GuiNodeFromJson(extra), PropertyClosureError);

  nlohmann::json missing = doc;
  missing["properties"].erase("text");
  EXPECT_THROW(GuiNodeFromJson(missing), PropertyClosureError);
}

TEST(ModelIo, UnknownEnumSpellingIsRejected) {
  EXPECT_THROW(ParseActionType("Tap"), ModelError);
  EXPECT_THROW(ParseWindowKind("Popup"), ModelError);
  EXPECT_THROW(ParseAbstractionLevel("L6"), ModelError);
  for (ActionType t : {ActionType::kClick, ActionType::kPressBack,
                       ActionType::kResetApp, ActionType::kItemLongClick}) {
    EXPECT_EQ(ParseActionType(ToString(t)), t);
  }
}

TEST(Model, ActionCosts) {
  EXPECT_EQ(ActionCost(ActionType::kResetApp), 10.0);
  EXPECT_EQ(ActionCost(ActionType::kClick), 1.0);
  EXPECT_EQ(ActionCost(ActionType::kPressBack), 1.0);
}

TEST(Model, NodePaths) {
  GuiNode root;
  root.children.resize(2);
  root.children[1].children.resize(3);
  root.children[1].children[2].text = "deep";
  EXPECT_EQ(CountNodes(root), 6u);
  ASSERT_NE(NodeAt(root, "1/2"), nullptr);
  EXPECT_EQ(NodeAt(root, "1/2")->text, "deep");
  EXPECT_EQ(NodeAt(root, ""), &root);
  EXPECT_EQ(NodeAt(root, "1/3"), nullptr);
  EXPECT_EQ(NodeAt(root, "x"), nullptr);
}

TEST(Model, IdAllocatorSkipsObservedIds) {
  IdAllocator ids("s");
  ids.Observe("s7");
  ids.Observe("s3");
  ids.Observe("other9");
  EXPECT_EQ(ids.Next(), "s8");
  EXPECT_EQ(ids.Next(), "s9");
}

TEST(Model, OverlayKinds) {
  EXPECT_TRUE(IsOverlay(WindowKind::kDialog));
  EXPECT_TRUE(IsOverlay(WindowKind::kOptionsMenu));
  EXPECT_TRUE(IsOverlay(WindowKind::kContextMenu));
  EXPECT_FALSE(IsOverlay(WindowKind::kActivity));
  EXPECT_FALSE(IsOverlay(WindowKind::kLauncher));
}

}  // namespace
}  // namespace carryover
