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

// A deterministic simulated app. An AppSpec document declares, per version,
// windows with nested widgets, the inputs those widgets accept, typed state
// variables and one handler per input. A handler is a list of guarded
// commands; the first command whose guard holds runs its effects and
// reports the instructions it covers.
//
//   {"appId": "diary",
//    "versions": [{
//      "version": "v1",
//      "stateVariables": [{"name": "n", "type": "int", "initial": 0}],
//      "methods": {"Main.onAdd": 6},
//      "windows": [{"id": "main", "name": "MainActivity", "kind": "Launcher",
//                   "className": "app.MainActivity",
//                   "widgets": [{"id": "w3", "className": "android.widget.Button",
//                                "resourceId": "addNewItem", "clickable": true,
//                                "inputs": [{"id": "main.add",
//                                            "actionType": "Click"}]}]}],
//      "handlers": {"main.add": [{"when": {"var": "n", "lt": 3},
//                                 "effects": [{"add": "n", "value": 1},
//                                             {"navigate": "edit"}],
//                                 "covers": {"Main.onAdd": [1, 6]}}]}}]}
//
// Conditions: {"var": v, "eq"|"ne"|"lt"|"gt": value}, {"all": [...]},
// {"any": [...]}, {"not": c}. Effects: set, add, toggle, show, hide,
// setText, navigate, back, backTo, outOfApp. A window may name the
// abstraction level its states start at ("abstractionLevel": "L2").

#ifndef CARRYOVER_HARNESS_H_
#define CARRYOVER_HARNESS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "carryover/driver.h"
#include "carryover/model.h"

namespace carryover {

inline constexpr std::string_view kOutOfAppWindow = "OutOfApp";
inline constexpr std::string_view kRootClass = "android.widget.FrameLayout";

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InputSpec {
  InputId id;
  ActionType actionType = ActionType::kClick;
};

struct WidgetSpec {
  WidgetId id;
  std::string className;
  std::string resourceId;
  std::string contentDescription;
  std::string text;
  std::optional<std::string> textVar;
  std::vector<std::string> textPool;
  std::optional<std::string> launchVaryingPrefix;
  bool clickable = false;
  bool longClickable = false;
  bool scrollable = false;
  bool isInputField = false;
  bool password = false;
  bool checked = false;
  // Boolean variable shown as the checked property and toggled on click.
  std::optional<std::string> boundVar;
  nlohmann::json visibleWhen;
  nlohmann::json enabledWhen;
  nlohmann::json selectedWhen;
  bool hidden = false;
  // Integer variable giving the number of rendered copies.
  std::optional<std::string> repeatVar;
  std::optional<Bounds> bounds;
  bool dynamicOnly = false;
  std::vector<InputSpec> inputs;
  std::vector<WidgetSpec> children;
};

struct WindowSpec {
  WindowId id;
  std::string name;
  WindowKind kind = WindowKind::kActivity;
  std::string className;
  bool dynamicOnly = false;
  // Initial abstraction level of the window's states.
  std::optional<AbstractionLevel> abstractionLevel;
  std::vector<WidgetSpec> widgets;
  // Window-level inputs such as PressMenu.
  std::vector<InputSpec> inputs;
};

struct Effect {
  std::string op;
  std::string target;
  nlohmann::json value;
};

struct Command {
  nlohmann::json when;
  std::vector<Effect> effects;
  std::map<MethodId, std::pair<int, int>> covers;
};

struct VariableSpec {
  std::string name;
  std::string type;  // bool, int or string
  nlohmann::json initial;
  bool persistent = false;
};

struct VersionSpec {
  VersionTag version;
  std::vector<WindowSpec> windows;
  std::map<InputId, std::vector<Command>> handlers;
  std::vector<VariableSpec> stateVariables;
  std::map<MethodId, int> methods;
  std::vector<std::pair<WindowId, WindowId>> relatedWindows;
  // Text values offered to TextFill on a widget.
  std::map<WidgetId, std::vector<std::string>> textValues;
  std::set<MethodId> updatedMethods;

  const WindowSpec* FindWindow(std::string_view id) const;
  const WindowSpec& Launcher() const;
};

struct AppSpec {
  std::string appId;
  std::vector<VersionSpec> versions;

  size_t IndexOf(std::string_view version) const;
  const VersionSpec& Version(std::string_view version) const;
};

AppSpec ParseSpec(const nlohmann::json& doc);
AppSpec LoadSpec(const std::filesystem::path& path);

// The static model a window-transition analysis would extract: dynamicOnly
// windows and widgets are left out.
Ewtg ExportEwtg(const AppSpec& spec, size_t version);
AppModel ExportModel(const AppSpec& spec, size_t version);

struct TargetManifest {
  std::set<MethodId> updatedMethodIds;
  std::map<MethodId, int> instructionCounts;
};

// Every method for the first version; new or modified methods afterwards.
TargetManifest DiffTargets(const AppSpec& spec, size_t version);

class SimDriver : public Driver {
 public:
  SimDriver(const AppSpec& spec, size_t version, unsigned long long seed,
            long long epoch = 0);

  StepResult Reset() override;
  Observation Current() const override;
  StepResult Perform(const Action& action) override;

  const nlohmann::json& Variable(const std::string& name) const;
  int launches() const { return launches_; }

 private:
  struct Rendered {
    const WidgetSpec* spec = nullptr;
    int copy = 0;
  };

  Observation Render() const;
  void RenderWidget(const WidgetSpec& w, GuiNode& parent,
                    const std::string& parentPath,
                    std::map<std::string, Rendered>& index) const;
  bool Holds(const nlohmann::json& condition) const;
  bool Visible(const WidgetSpec& w) const;
  std::string TextOf(const WidgetSpec& w, int copy) const;
  InstructionSet Fire(const InputId& input);
  void Apply(const Effect& e);
  void Navigate(const WindowId& to);
  void Back();

  const AppSpec& spec_;
  const VersionSpec& version_;
  unsigned long long seed_;
  long long epoch_;
  int launches_ = 0;
  std::map<std::string, nlohmann::json> vars_;
  WindowId window_;
  std::vector<WindowId> backStack_;
  std::map<WidgetId, bool> shown_;
  std::map<WidgetId, std::string> texts_;
  mutable std::map<std::string, Rendered> index_;
};

}  // namespace carryover

#endif  // CARRYOVER_HARNESS_H_
