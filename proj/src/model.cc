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

#include "carryover/model.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <utility>

namespace carryover {
namespace {

constexpr std::array<std::pair<WindowKind, std::string_view>, 6> kWindowKinds{{
    {WindowKind::kActivity, "Activity"},
    {WindowKind::kDialog, "Dialog"},
    {WindowKind::kOptionsMenu, "OptionsMenu"},
    {WindowKind::kContextMenu, "ContextMenu"},
    {WindowKind::kLauncher, "Launcher"},
    {WindowKind::kOutOfApp, "OutOfApp"},
}};

constexpr std::array<std::pair<ActionType, std::string_view>, 12> kActions{{
    {ActionType::kClick, "Click"},
    {ActionType::kLongClick, "LongClick"},
    {ActionType::kSwipe, "Swipe"},
    {ActionType::kTextFill, "TextFill"},
    {ActionType::kCloseKeyboard, "CloseKeyboard"},
    {ActionType::kPressBack, "PressBack"},
    {ActionType::kPressMenu, "PressMenu"},
    {ActionType::kRotateScreen, "RotateScreen"},
    {ActionType::kResetApp, "ResetApp"},
    {ActionType::kIntent, "Intent"},
    {ActionType::kItemClick, "ItemClick"},
    {ActionType::kItemLongClick, "ItemLongClick"},
}};

constexpr std::array<std::pair<AbstractionLevel, std::string_view>, 5>
    kLevels{{
        {AbstractionLevel::kL1, "L1"},
        {AbstractionLevel::kL2, "L2"},
        {AbstractionLevel::kL3, "L3"},
        {AbstractionLevel::kL4, "L4"},
        {AbstractionLevel::kL5, "L5"},
    }};

template <typename E, size_t N>
std::string_view Lookup(const std::array<std::pair<E, std::string_view>, N>& t,
                        E value) {
  for (const auto& [e, s] : t) {
    if (e == value) return s;
  }
  return "?";
}

template <typename E, size_t N>
E Parse(const std::array<std::pair<E, std::string_view>, N>& t,
        std::string_view text, std::string_view what) {
  for (const auto& [e, s] : t) {
    if (s == text) return e;
  }
  throw ModelError("unknown " + std::string(what) + " '" + std::string(text) +
                   "'");
}

template <typename T>
auto FindById(T& items, std::string_view id) -> decltype(&items[0]) {
  for (auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

}  // namespace

std::string_view ToString(WindowKind kind) { return Lookup(kWindowKinds, kind); }
std::string_view ToString(ActionType type) { return Lookup(kActions, type); }
std::string_view ToString(AbstractionLevel level) {
  return Lookup(kLevels, level);
}
WindowKind ParseWindowKind(std::string_view text) {
  return Parse(kWindowKinds, text, "window kind");
}
ActionType ParseActionType(std::string_view text) {
  return Parse(kActions, text, "action type");
}
AbstractionLevel ParseAbstractionLevel(std::string_view text) {
  return Parse(kLevels, text, "abstraction level");
}

bool IsOverlay(WindowKind kind) {
  return kind == WindowKind::kDialog || kind == WindowKind::kOptionsMenu ||
         kind == WindowKind::kContextMenu;
}

bool IsWindowLevel(ActionType type) {
  switch (type) {
    case ActionType::kPressBack:
    case ActionType::kPressMenu:
    case ActionType::kRotateScreen:
    case ActionType::kResetApp:
    case ActionType::kIntent:
    case ActionType::kCloseKeyboard:
      return true;
    default:
      return false;
  }
}

// --- Ewtg ------------------------------------------------------------------

const Window* Ewtg::FindWindow(std::string_view id) const {
  return FindById(windows, id);
}
Window* Ewtg::FindWindow(std::string_view id) { return FindById(windows, id); }
const EwtgWidget* Ewtg::FindWidget(std::string_view id) const {
  return FindById(widgets, id);
}
const Input* Ewtg::FindInput(std::string_view id) const {
  return FindById(inputs, id);
}
const WindowTransition* Ewtg::FindTransition(std::string_view id) const {
  return FindById(windowTransitions, id);
}

const Window* Ewtg::Launcher() const {
  for (const auto& w : windows) {
    if (w.kind == WindowKind::kLauncher) return &w;
  }
  return nullptr;
}

std::vector<const Input*> Ewtg::InputsOf(std::string_view windowId) const {
  std::vector<const Input*> out;
  for (const auto& i : inputs) {
    if (i.windowId == windowId) out.push_back(&i);
  }
  return out;
}

std::vector<const WindowTransition*> Ewtg::TransitionsOfInput(
    std::string_view inputId) const {
  std::vector<const WindowTransition*> out;
  for (const auto& t : windowTransitions) {
    if (t.inputId == inputId) out.push_back(&t);
  }
  return out;
}

const Input* Ewtg::ResolveInput(std::string_view windowId,
                                const std::optional<WidgetId>& widgetId,
                                ActionType type) const {
  for (const auto& i : inputs) {
    if (i.windowId == windowId && i.actionType == type &&
        i.widgetId == widgetId) {
      return &i;
    }
  }
  return nullptr;
}

// --- Dstg ------------------------------------------------------------------

const Avm* AbstractState::FindAvm(std::string_view avmId) const {
  return FindById(avms, avmId);
}

const AbstractState* Dstg::FindState(std::string_view id) const {
  return FindById(abstractStates, id);
}
AbstractState* Dstg::FindState(std::string_view id) {
  return FindById(abstractStates, id);
}
const AbstractTransition* Dstg::FindTransition(std::string_view id) const {
  return FindById(abstractTransitions, id);
}

AbstractionLevel Dstg::LevelOf(std::string_view windowId) const {
  auto it = abstractionPolicy.find(std::string(windowId));
  return it == abstractionPolicy.end() ? AbstractionLevel::kL1 : it->second;
}

std::vector<const AbstractState*> Dstg::StatesOf(
    std::string_view windowId) const {
  std::vector<const AbstractState*> out;
  for (const auto& s : abstractStates) {
    if (s.windowId == windowId) out.push_back(&s);
  }
  return out;
}

const GuiTree* Gstg::FindTree(std::string_view id) const {
  return FindById(guiTrees, id);
}

// --- Integrity -------------------------------------------------------------

std::vector<std::string> ValidateIntegrity(const AppModel& model) {
  std::vector<std::string> out;
  auto report = [&out](std::string msg) { out.push_back(std::move(msg)); };
  const Ewtg& e = model.ewtg;

  auto check_unique = [&](const auto& items, std::string_view what) {
    std::set<std::string> seen;
    for (const auto& item : items) {
      if (!seen.insert(item.id).second) {
        report("duplicate " + std::string(what) + " id '" + item.id + "'");
      }
    }
  };
  check_unique(e.windows, "window");
  check_unique(e.widgets, "widget");
  check_unique(e.inputs, "input");
  check_unique(e.windowTransitions, "window transition");
  check_unique(model.dstg.abstractStates, "abstract state");
  check_unique(model.dstg.abstractTransitions, "abstract transition");
  check_unique(model.gstg.guiTrees, "gui tree");

  for (const auto& w : e.windows) {
    for (const auto& wid : w.widgetIds) {
      const EwtgWidget* widget = e.FindWidget(wid);
      if (widget == nullptr) {
        report("window '" + w.id + "' lists dangling widget '" + wid + "'");
      } else if (widget->windowId != w.id) {
        report("window '" + w.id + "' lists widget '" + wid +
               "' of window '" + widget->windowId + "'");
      }
    }
  }
  for (const auto& w : e.widgets) {
    const Window* win = e.FindWindow(w.windowId);
    if (win == nullptr) {
      report("widget '" + w.id + "' has dangling window '" + w.windowId + "'");
    } else if (!win->widgetIds.contains(w.id)) {
      report("widget '" + w.id + "' is not listed by window '" + w.windowId +
             "'");
    }
    if (w.xpath.empty()) report("widget '" + w.id + "' has an empty xpath");
    if (w.parentId) {
      const EwtgWidget* parent = e.FindWidget(*w.parentId);
      if (parent == nullptr) {
        report("widget '" + w.id + "' has dangling parent '" + *w.parentId +
               "'");
      } else if (parent->windowId != w.windowId) {
        report("widget '" + w.id + "' has parent '" + *w.parentId +
               "' in another window");
      }
    }
  }
  for (const auto& i : e.inputs) {
    if (e.FindWindow(i.windowId) == nullptr) {
      report("input '" + i.id + "' has dangling window '" + i.windowId + "'");
    }
    if (i.widgetId) {
      const EwtgWidget* widget = e.FindWidget(*i.widgetId);
      if (widget == nullptr) {
        report("input '" + i.id + "' has dangling widget '" + *i.widgetId +
               "'");
      } else if (widget->windowId != i.windowId) {
        report("input '" + i.id + "' widget '" + *i.widgetId +
               "' belongs to another window");
      }
    }
  }
  for (const auto& t : e.windowTransitions) {
    if (e.FindWindow(t.sourceWindowId) == nullptr) {
      report("window transition '" + t.id + "' has dangling source '" +
             t.sourceWindowId + "'");
    }
    if (e.FindWindow(t.destinationWindowId) == nullptr) {
      report("window transition '" + t.id + "' has dangling destination '" +
             t.destinationWindowId + "'");
    }
    const Input* in = e.FindInput(t.inputId);
    if (in == nullptr) {
      report("window transition '" + t.id + "' has dangling input '" +
             t.inputId + "'");
    } else if (in->windowId != t.sourceWindowId) {
      report("window transition '" + t.id + "' input '" + t.inputId +
             "' belongs to another window");
    }
  }

  const Dstg& d = model.dstg;
  for (const auto& [win, level] : d.abstractionPolicy) {
    if (e.FindWindow(win) == nullptr) {
      report("abstraction policy names dangling window '" + win + "'");
    }
  }
  for (const auto& s : d.abstractStates) {
    if (e.FindWindow(s.windowId) == nullptr) {
      report("abstract state '" + s.id + "' has dangling window '" +
             s.windowId + "'");
    }
    std::set<std::string> avm_ids;
    for (const auto& a : s.avms) {
      if (!avm_ids.insert(a.id).second) {
        report("abstract state '" + s.id + "' repeats avm '" + a.id + "'");
      }
      if (a.cardinality < 1) {
        report("avm '" + a.id + "' has cardinality " +
               std::to_string(a.cardinality));
      }
      if (a.ewtgWidgetId) {
        const EwtgWidget* widget = e.FindWidget(*a.ewtgWidgetId);
        if (widget == nullptr) {
          report("avm '" + a.id + "' of state '" + s.id +
                 "' links dangling widget '" + *a.ewtgWidgetId + "'");
        } else if (widget->windowId != s.windowId) {
          report("avm '" + a.id + "' links widget '" + *a.ewtgWidgetId +
                 "' of another window");
        }
      }
    }
  }
  for (const auto& id : d.initialStateIds) {
    if (d.FindState(id) == nullptr) {
      report("initial state '" + id + "' is dangling");
    }
  }
  for (const auto& t : d.abstractTransitions) {
    const AbstractState* src = d.FindState(t.sourceStateId);
    if (src == nullptr) {
      report("abstract transition '" + t.id + "' has dangling source '" +
             t.sourceStateId + "'");
    } else if (t.sourceAvmId && src->FindAvm(*t.sourceAvmId) == nullptr) {
      report("abstract transition '" + t.id + "' source avm '" +
             *t.sourceAvmId + "' is not in state '" + t.sourceStateId + "'");
    }
    if (d.FindState(t.destinationStateId) == nullptr) {
      report("abstract transition '" + t.id + "' has dangling destination '" +
             t.destinationStateId + "'");
    }
    if (t.windowTransitionId && e.FindTransition(*t.windowTransitionId) ==
                                    nullptr) {
      report("abstract transition '" + t.id +
             "' links dangling window transition '" + *t.windowTransitionId +
             "'");
    }
    if (t.inputId && e.FindInput(*t.inputId) == nullptr) {
      report("abstract transition '" + t.id + "' links dangling input '" +
             *t.inputId + "'");
    }
  }

  const Gstg& g = model.gstg;
  for (const auto& tree : g.guiTrees) {
    const AbstractState* s = d.FindState(tree.abstractStateId);
    if (s == nullptr) {
      report("gui tree '" + tree.id + "' has dangling abstract state '" +
             tree.abstractStateId + "'");
    } else if (s->windowId != tree.windowId) {
      report("gui tree '" + tree.id + "' window differs from its state's");
    }
  }
  for (size_t i = 1; i < g.guiTrees.size(); ++i) {
    if (g.guiTrees[i].sessionIndex <= g.guiTrees[i - 1].sessionIndex) {
      report("gui tree '" + g.guiTrees[i].id +
             "' breaks the increasing session index");
    }
  }
  for (size_t i = 0; i < g.actions.size(); ++i) {
    const TraceStep& step = g.actions[i];
    if (g.FindTree(step.sourceTreeId) == nullptr ||
        g.FindTree(step.destinationTreeId) == nullptr) {
      report("trace step " + std::to_string(i) + " has a dangling tree");
    }
    if (step.action.inputId && e.FindInput(*step.action.inputId) == nullptr) {
      report("trace step " + std::to_string(i) + " has dangling input '" +
             *step.action.inputId + "'");
    }
  }
  if (model.adaptation) {
    for (const auto& wid : model.adaptation->addedOrReplacedWidgetIds) {
      if (e.FindWidget(wid) == nullptr) {
        report("adaptation lists dangling widget '" + wid + "'");
      }
    }
  }
  return out;
}

// --- Trees -----------------------------------------------------------------

const GuiNode* NodeAt(const GuiNode& root, std::string_view path) {
  const GuiNode* node = &root;
  while (!path.empty()) {
    size_t slash = path.find('/');
    std::string_view head = path.substr(0, slash);
    size_t index = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(),
                                     index);
    if (ec != std::errc() || ptr != head.data() + head.size() ||
        index >= node->children.size()) {
      return nullptr;
    }
    node = &node->children[index];
    path = slash == std::string_view::npos ? std::string_view()
                                           : path.substr(slash + 1);
  }
  return node;
}

size_t CountNodes(const GuiNode& root) {
  size_t n = 1;
  for (const auto& c : root.children) n += CountNodes(c);
  return n;
}

void IdAllocator::Observe(std::string_view id) {
  if (!id.starts_with(prefix_)) return;
  std::string_view rest = id.substr(prefix_.size());
  long long n = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
  if (ec == std::errc() && ptr == rest.data() + rest.size() && n >= next_) {
    next_ = n + 1;
  }
}

std::string IdAllocator::Next() { return prefix_ + std::to_string(next_++); }

}  // namespace carryover
