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

#include "carryover/abstraction.h"

#include <algorithm>

#include "carryover/diff.h"
#include "carryover/model_io.h"

namespace carryover {
namespace {

const std::vector<Reducer>& Table() {
  static const std::vector<Reducer> table = {
      {"R_RID", [](const GuiNode& n) -> Valuation { return n.resourceId; }},
      {"R_CN", [](const GuiNode& n) -> Valuation { return n.className; }},
      {"R_CD",
       [](const GuiNode& n) -> Valuation { return n.contentDescription; }},
      {"R_P", [](const GuiNode& n) -> Valuation { return n.password; }},
      {"R_C", [](const GuiNode& n) -> Valuation { return n.clickable; }},
      {"R_LC", [](const GuiNode& n) -> Valuation { return n.longClickable; }},
      {"R_Scrollable",
       [](const GuiNode& n) -> Valuation { return n.scrollable; }},
      {"R_Ch", [](const GuiNode& n) -> Valuation { return n.checked; }},
      {"R_E", [](const GuiNode& n) -> Valuation { return n.enabled; }},
      {"R_Selected", [](const GuiNode& n) -> Valuation { return n.selected; }},
      {"R_I", [](const GuiNode& n) -> Valuation { return n.isInputField; }},
      {"R_T", [](const GuiNode& n) -> Valuation { return n.text; }},
      {"R_HC", [](const GuiNode& n) -> Valuation { return n.hasChildren; }},
  };
  return table;
}

constexpr size_t kL1Count = 11;

std::string EncodeChildren(const GuiNode& node, AbstractionLevel level) {
  std::vector<std::string> parts;
  for (const auto& child : node.children) {
    parts.push_back(ToJson(Valuate(child, level)).dump());
  }
  std::sort(parts.begin(), parts.end());
  std::string out = "[";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ",";
    out += parts[i];
  }
  return out + "]";
}

// Multiset of (valuations, cardinality) pairs.
std::map<std::pair<Valuations, int>, int> Signature(const AbstractState& s) {
  std::map<std::pair<Valuations, int>, int> out;
  for (const auto& a : s.avms) ++out[{a.valuations, a.cardinality}];
  return out;
}

bool AvmMatches(const Avm& a, const Avm& b,
                const std::set<WidgetId>& addedOrReplaced) {
  if (a.valuations == b.valuations) return true;
  return a.ewtgWidgetId && a.ewtgWidgetId == b.ewtgWidgetId &&
         addedOrReplaced.contains(*a.ewtgWidgetId);
}

}  // namespace

const std::vector<Reducer>& AllReducers() { return Table(); }

const Reducer& ReducerNamed(std::string_view name) {
  for (const auto& r : Table()) {
    if (r.name == name) return r;
  }
  throw AbstractionError("unknown reducer '" + std::string(name) + "'");
}

std::vector<Reducer> OwnReducers(AbstractionLevel level) {
  const auto& t = Table();
  size_t count = kL1Count;
  if (level == AbstractionLevel::kL3) {
    count = kL1Count + 2;
  } else if (level != AbstractionLevel::kL1) {
    count = kL1Count + 1;
  }
  return std::vector<Reducer>(t.begin(), t.begin() + count);
}

std::optional<AbstractionLevel> ChildLevel(AbstractionLevel level) {
  if (level == AbstractionLevel::kL4) return AbstractionLevel::kL1;
  if (level == AbstractionLevel::kL5) return AbstractionLevel::kL2;
  return std::nullopt;
}

Valuations Valuate(const GuiNode& node, AbstractionLevel level) {
  Valuations out;
  for (const auto& r : OwnReducers(level)) {
    out.emplace(std::string(r.name), r.extract(node));
  }
  if (auto child = ChildLevel(level)) {
    out.emplace(std::string(kChildrenKey), EncodeChildren(node, *child));
  }
  return out;
}

Valuations ProjectL1(const Valuations& valuations) {
  Valuations out;
  const auto& t = Table();
  for (size_t i = 0; i < kL1Count; ++i) {
    auto it = valuations.find(std::string(t[i].name));
    if (it != valuations.end()) out.insert(*it);
  }
  return out;
}

bool IsAbstracted(const GuiNode& node) {
  if (node.clickable || node.longClickable || node.scrollable ||
      node.isInputField) {
    return true;
  }
  return node.children.empty() &&
         (!node.resourceId.empty() || !node.text.empty() ||
          !node.contentDescription.empty());
}

WidgetAssociation AssociateWidgets(const GuiNode& root, const Ewtg& ewtg,
                                   std::string_view windowId) {
  std::vector<const EwtgWidget*> widgets;
  for (const auto& w : ewtg.widgets) {
    if (w.windowId == windowId) widgets.push_back(&w);
  }
  WidgetAssociation out;
  ForEachNode(root, [&](const std::string& path, const GuiNode& node,
                        const std::string& xpath) {
    if (!IsAbstracted(node)) return;
    const EwtgWidget* hit = nullptr;
    for (const EwtgWidget* w : widgets) {
      if (w->xpath == xpath && w->resourceId == node.resourceId) {
        hit = w;
        break;
      }
    }
    if (hit == nullptr && !node.resourceId.empty()) {
      for (const EwtgWidget* w : widgets) {
        if (w->resourceId == node.resourceId &&
            w->className == node.className) {
          hit = w;
          break;
        }
      }
    }
    if (hit != nullptr) out[path] = hit->id;
  });
  return out;
}

std::vector<AbstractNode> AbstractNodes(const GuiNode& root,
                                        AbstractionLevel level,
                                        const WidgetAssociation& association) {
  std::vector<AbstractNode> out;
  ForEachNode(root, [&](const std::string& path, const GuiNode& node,
                        const std::string&) {
    if (!IsAbstracted(node)) return;
    AbstractNode n;
    n.path = path;
    n.valuations = Valuate(node, level);
    auto it = association.find(path);
    if (it != association.end()) n.widgetId = it->second;
    n.node = &node;
    out.push_back(std::move(n));
  });
  return out;
}

AbstractState DeriveAbstractState(const GuiTree& tree, AbstractionLevel level,
                                  const WidgetAssociation& association) {
  std::map<Valuations, Avm> merged;
  for (auto& n : AbstractNodes(tree.root, level, association)) {
    auto [it, inserted] = merged.try_emplace(n.valuations);
    if (inserted) {
      it->second.valuations = std::move(n.valuations);
      it->second.ewtgWidgetId = n.widgetId;
      it->second.cardinality = 1;
    } else {
      ++it->second.cardinality;
      if (!it->second.ewtgWidgetId) it->second.ewtgWidgetId = n.widgetId;
    }
  }
  AbstractState s;
  s.windowId = tree.windowId;
  s.abstractionLevel = level;
  int k = 0;
  for (auto& [v, avm] : merged) {
    avm.id = "a" + std::to_string(++k);
    s.avms.push_back(std::move(avm));
  }
  return s;
}

bool StatesEqual(const AbstractState& a, const AbstractState& b) {
  if (a.windowId != b.windowId) {
    throw AbstractionError("cannot compare states of windows '" + a.windowId +
                           "' and '" + b.windowId + "'");
  }
  if (a.abstractionLevel != b.abstractionLevel) {
    throw AbstractionError("cannot compare states at levels " +
                           std::string(ToString(a.abstractionLevel)) +
                           " and " +
                           std::string(ToString(b.abstractionLevel)));
  }
  return Signature(a) == Signature(b);
}

LayoutFingerprint LayoutOf(const AbstractState& state) {
  LayoutFingerprint out;
  for (const auto& a : state.avms) out[ProjectL1(a.valuations)] += a.cardinality;
  return out;
}

double LayoutSimilarity(const LayoutFingerprint& a,
                        const LayoutFingerprint& b) {
  long long inter = 0;
  long long uni = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      uni += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      uni += ib->second;
      ++ib;
    } else {
      inter += std::min(ia->second, ib->second);
      uni += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double LayoutSimilarity(const AbstractState& a, const AbstractState& b) {
  return LayoutSimilarity(LayoutOf(a), LayoutOf(b));
}

std::optional<AbstractionLevel> RefineAbstraction(const Window& window,
                                                  const GuiTree& a,
                                                  const GuiTree& b,
                                                  AbstractionLevel current) {
  if (a.windowId != window.id || b.windowId != window.id) {
    throw AbstractionError("refinement trees do not belong to window '" +
                           window.id + "'");
  }
  const WidgetAssociation none;
  for (int l = static_cast<int>(current) + 1;
       l <= static_cast<int>(AbstractionLevel::kL5); ++l) {
    auto level = static_cast<AbstractionLevel>(l);
    if (!StatesEqual(DeriveAbstractState(a, level, none),
                     DeriveAbstractState(b, level, none))) {
      return level;
    }
  }
  return std::nullopt;
}

bool IsBackwardEquivalent(const AbstractState& observed,
                          const AbstractState& expected,
                          const std::set<WidgetId>& addedOrReplaced) {
  if (observed.windowId != expected.windowId) return false;
  for (const auto& e : expected.avms) {
    bool found = std::any_of(
        observed.avms.begin(), observed.avms.end(),
        [&](const Avm& o) { return AvmMatches(o, e, addedOrReplaced); });
    if (!found) return false;
  }
  for (const auto& o : observed.avms) {
    if (o.ewtgWidgetId && addedOrReplaced.contains(*o.ewtgWidgetId)) continue;
    bool found = std::any_of(
        expected.avms.begin(), expected.avms.end(),
        [&](const Avm& e) { return AvmMatches(o, e, addedOrReplaced); });
    if (!found) return false;
  }
  return true;
}

bool IsBackwardEquivalent(const AbstractState& observed,
                          const AbstractState& expected,
                          const DiffResult& diff) {
  return IsBackwardEquivalent(observed, expected,
                              diff.AddedOrReplacedUpdatedWidgets());
}

std::optional<LayoutFingerprint> MakeLayoutGuard(
    const AbstractState& destination, const Gstg& gstg, const Dstg& dstg,
    size_t fromTree, double threshold) {
  if (gstg.guiTrees.empty()) return std::nullopt;
  fromTree = std::min(fromTree, gstg.guiTrees.size() - 1);
  for (size_t j = fromTree + 1; j-- > 0;) {
    const GuiTree& tree = gstg.guiTrees[j];
    if (tree.windowId == destination.windowId) {
      const AbstractState* s = dstg.FindState(tree.abstractStateId);
      if (s != nullptr && LayoutSimilarity(*s, destination) >= threshold) {
        return LayoutOf(*s);
      }
    }
    if (j == 0) break;
    if (j - 1 < gstg.actions.size() &&
        gstg.actions[j - 1].action.actionType == ActionType::kResetApp) {
      break;
    }
  }
  return std::nullopt;
}

}  // namespace carryover
