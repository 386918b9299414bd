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

// The three-layer app model:
//
//   EWTG  static windows, widgets, inputs and window transitions, each input
//         annotated with the methods its handler may reach;
//   DSTG  abstract states (sets of attribute valuation maps) and the abstract
//         transitions learned while testing;
//   GSTG  the concrete GUI trees observed in one session and the executed
//         action trace linking them.
//
// All identifiers are opaque strings. Elements of two app versions are never
// related by identifier equality; only the diff module pairs them.

#ifndef CARRYOVER_MODEL_H_
#define CARRYOVER_MODEL_H_

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace carryover {

using WindowId = std::string;
using WidgetId = std::string;
using InputId = std::string;
using TransitionId = std::string;
using StateId = std::string;
using AvmId = std::string;
using TreeId = std::string;
using MethodId = std::string;
using VersionTag = std::string;

enum class WindowKind {
  kActivity,
  kDialog,
  kOptionsMenu,
  kContextMenu,
  kLauncher,
  kOutOfApp,
};

enum class ActionType {
  kClick,
  kLongClick,
  kSwipe,
  kTextFill,
  kCloseKeyboard,
  kPressBack,
  kPressMenu,
  kRotateScreen,
  kResetApp,
  kIntent,
  kItemClick,
  kItemLongClick,
};

enum class AbstractionLevel { kL1 = 1, kL2, kL3, kL4, kL5 };

// Raised for unknown enumeration spellings and other malformed values.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view ToString(WindowKind kind);
std::string_view ToString(ActionType type);
std::string_view ToString(AbstractionLevel level);
WindowKind ParseWindowKind(std::string_view text);
ActionType ParseActionType(std::string_view text);
AbstractionLevel ParseAbstractionLevel(std::string_view text);

// Dialogs and menus are drawn over the window that opened them; closing one
// returns to that window.
bool IsOverlay(WindowKind kind);

// Actions that need no widget.
bool IsWindowLevel(ActionType type);

// Resetting the app costs about ten ordinary actions.
inline double ActionCost(ActionType type) {
  return type == ActionType::kResetApp ? 10.0 : 1.0;
}

// ---------------------------------------------------------------------------
// EWTG

struct Window {
  WindowId id;
  std::string name;
  WindowKind kind = WindowKind::kActivity;
  std::string className;
  bool runtimeCreated = false;
  std::set<WidgetId> widgetIds;

  bool operator==(const Window&) const = default;
};

struct EwtgWidget {
  WidgetId id;
  WindowId windowId;
  std::string className;
  std::string resourceId;
  std::string contentDescription;
  std::string xpath;
  std::optional<WidgetId> parentId;
  bool runtimeCreated = false;

  bool operator==(const EwtgWidget&) const = default;
};

struct Input {
  InputId id;
  WindowId windowId;
  std::optional<WidgetId> widgetId;
  ActionType actionType = ActionType::kClick;
  std::set<MethodId> handlerMethodIds;
  bool runtimeCreated = false;

  bool operator==(const Input&) const = default;
};

struct WindowTransition {
  TransitionId id;
  WindowId sourceWindowId;
  WindowId destinationWindowId;
  InputId inputId;
  bool runtimeCreated = false;

  bool operator==(const WindowTransition&) const = default;
};

struct Ewtg {
  std::vector<Window> windows;
  std::vector<EwtgWidget> widgets;
  std::vector<Input> inputs;
  std::vector<WindowTransition> windowTransitions;

  const Window* FindWindow(std::string_view id) const;
  Window* FindWindow(std::string_view id);
  const EwtgWidget* FindWidget(std::string_view id) const;
  const Input* FindInput(std::string_view id) const;
  const WindowTransition* FindTransition(std::string_view id) const;
  const Window* Launcher() const;

  std::vector<const Input*> InputsOf(std::string_view windowId) const;
  std::vector<const WindowTransition*> TransitionsOfInput(
      std::string_view inputId) const;
  // The input of `windowId` triggered by `type` on `widgetId` (or the
  // window-level input of that type when `widgetId` is absent).
  const Input* ResolveInput(std::string_view windowId,
                            const std::optional<WidgetId>& widgetId,
                            ActionType type) const;

  bool operator==(const Ewtg&) const = default;
};

// ---------------------------------------------------------------------------
// DSTG

using Valuation = std::variant<bool, std::string>;
using Valuations = std::map<std::string, Valuation>;

struct Avm {
  AvmId id;
  std::optional<WidgetId> ewtgWidgetId;
  Valuations valuations;
  int cardinality = 1;

  bool operator==(const Avm&) const = default;
};

struct AbstractState {
  StateId id;
  WindowId windowId;
  std::vector<Avm> avms;
  AbstractionLevel abstractionLevel = AbstractionLevel::kL1;
  bool obsolete = false;
  std::set<VersionTag> observedInVersions;

  const Avm* FindAvm(std::string_view avmId) const;
  bool operator==(const AbstractState&) const = default;
};

// Multiset of L1 valuation vectors; the count of an entry is the number of
// concrete widgets that project onto it.
using LayoutFingerprint = std::map<Valuations, int>;

struct AbstractTransition {
  TransitionId id;
  StateId sourceStateId;
  std::optional<AvmId> sourceAvmId;
  ActionType actionType = ActionType::kClick;
  std::optional<std::string> dataPayload;
  StateId destinationStateId;
  std::optional<LayoutFingerprint> layoutGuard;
  VersionTag provenanceVersion;
  std::optional<TransitionId> windowTransitionId;
  std::optional<InputId> inputId;

  bool operator==(const AbstractTransition&) const = default;
};

struct Dstg {
  std::vector<AbstractState> abstractStates;
  std::vector<AbstractTransition> abstractTransitions;
  std::map<WindowId, AbstractionLevel> abstractionPolicy;
  std::set<StateId> initialStateIds;

  const AbstractState* FindState(std::string_view id) const;
  AbstractState* FindState(std::string_view id);
  const AbstractTransition* FindTransition(std::string_view id) const;
  AbstractionLevel LevelOf(std::string_view windowId) const;
  std::vector<const AbstractState*> StatesOf(std::string_view windowId) const;

  bool operator==(const Dstg&) const = default;
};

// ---------------------------------------------------------------------------
// GSTG

struct Bounds {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool operator==(const Bounds&) const = default;
};

// The property set is closed: reducers read nothing else.
struct GuiNode {
  std::string resourceId;
  std::string className;
  std::string contentDescription;
  std::string text;
  bool password = false;
  bool clickable = false;
  bool longClickable = false;
  bool scrollable = false;
  bool checked = false;
  bool enabled = true;
  bool selected = false;
  bool isInputField = false;
  bool hasChildren = false;
  std::vector<GuiNode> children;
  std::optional<Bounds> boundsHint;

  bool operator==(const GuiNode&) const = default;
};

struct GuiTree {
  TreeId id;
  WindowId windowId;
  GuiNode root;
  StateId abstractStateId;
  int sessionIndex = 0;

  bool operator==(const GuiTree&) const = default;
};

struct Action {
  std::optional<InputId> inputId;
  ActionType actionType = ActionType::kClick;
  // Child indices from the root joined by '/'; "" is the root itself.
  std::optional<std::string> concreteNodePath;
  std::optional<std::string> dataPayload;

  double cost() const { return ActionCost(actionType); }
  bool operator==(const Action&) const = default;
};

struct TraceStep {
  TreeId sourceTreeId;
  Action action;
  TreeId destinationTreeId;

  bool operator==(const TraceStep&) const = default;
};

struct Gstg {
  std::vector<GuiTree> guiTrees;
  std::vector<TraceStep> actions;

  const GuiTree* FindTree(std::string_view id) const;
  bool empty() const { return guiTrees.empty() && actions.empty(); }
  bool operator==(const Gstg&) const = default;
};

// What the test step needs to know about the diff that produced this model.
struct AdaptationInfo {
  VersionTag baseVersion;
  std::set<WidgetId> addedOrReplacedWidgetIds;

  bool operator==(const AdaptationInfo&) const = default;
};

struct AppModel {
  VersionTag version;
  Ewtg ewtg;
  Dstg dstg;
  Gstg gstg;
  std::optional<AdaptationInfo> adaptation;

  bool operator==(const AppModel&) const = default;
};

// Returns one human-readable line per violated invariant; empty when the
// model is referentially sound.
std::vector<std::string> ValidateIntegrity(const AppModel& model);

// ---------------------------------------------------------------------------
// GUI tree helpers

// Visits nodes in pre-order with their node path and xpath.
template <typename Fn>
void ForEachNode(const GuiNode& node, Fn&& fn, const std::string& path = "",
                 const std::string& xpath = "") {
  const std::string here = xpath.empty() ? node.className
                                         : xpath + "/" + node.className;
  fn(path, node, here);
  for (size_t i = 0; i < node.children.size(); ++i) {
    ForEachNode(node.children[i], fn,
                path.empty() ? std::to_string(i)
                             : path + "/" + std::to_string(i),
                here);
  }
}

const GuiNode* NodeAt(const GuiNode& root, std::string_view path);
size_t CountNodes(const GuiNode& root);

// Allocates "<prefix><n>" identifiers above every numeric suffix seen so far.
class IdAllocator {
 public:
  explicit IdAllocator(std::string prefix) : prefix_(std::move(prefix)) {}
  void Observe(std::string_view id);
  std::string Next();

 private:
  std::string prefix_;
  long long next_ = 1;
};

}  // namespace carryover

#endif  // CARRYOVER_MODEL_H_
