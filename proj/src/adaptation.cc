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

#include "carryover/adaptation.h"

#include <algorithm>
#include <functional>
#include <set>

namespace carryover {
namespace {

template <typename M, typename K>
const typename M::mapped_type* Lookup(const M& map, const K& key) {
  auto it = map.find(key);
  return it == map.end() ? nullptr : &it->second;
}

std::string FreshId(const std::string& wanted,
                    const std::function<bool(const std::string&)>& taken) {
  if (!taken(wanted)) return wanted;
  for (int n = 2;; ++n) {
    std::string candidate = wanted + "~" + std::to_string(n);
    if (!taken(candidate)) return candidate;
  }
}

void CheckDiff(const DiffResult& diff, const Ewtg& base, const Ewtg& updated) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw AdaptationError("diff does not fit the EWTGs: " + what);
  };
  auto check = [&](const ElementDiff& d, auto findBase, auto findUpdated,
                   const std::string& kind) {
    for (const auto& id : d.deleted) {
      need(findBase(id), "deleted " + kind + " '" + id + "'");
    }
    for (const auto& id : d.added) {
      need(findUpdated(id), "added " + kind + " '" + id + "'");
    }
    for (const auto* m : {&d.replaced, &d.matched}) {
      for (const auto& [b, u] : *m) {
        need(findBase(b) && findUpdated(u),
             "paired " + kind + " '" + b + "' -> '" + u + "'");
      }
    }
  };
  check(
      diff.windows, [&](const auto& id) { return base.FindWindow(id); },
      [&](const auto& id) { return updated.FindWindow(id); }, "window");
  check(
      diff.widgets, [&](const auto& id) { return base.FindWidget(id); },
      [&](const auto& id) { return updated.FindWidget(id); }, "widget");
  check(
      diff.transitions,
      [&](const auto& id) { return base.FindTransition(id); },
      [&](const auto& id) { return updated.FindTransition(id); },
      "transition");
}

void MapInputs(const Ewtg& base, const Ewtg& updated, ElementMaps& maps) {
  for (const auto& in : base.inputs) {
    if (maps.inputs.contains(in.id)) continue;
    const WindowId* w = Lookup(maps.windows, in.windowId);
    if (w == nullptr) continue;
    std::optional<WidgetId> widget;
    if (in.widgetId) {
      const WidgetId* x = Lookup(maps.widgets, *in.widgetId);
      if (x == nullptr) continue;
      widget = *x;
    }
    if (const Input* u = updated.ResolveInput(*w, widget, in.actionType)) {
      maps.inputs[in.id] = u->id;
    }
  }
}

// Merges states of one window that became indistinguishable; transitions
// and initial ids are redirected to the first of them.
void MergeDuplicates(Dstg& d) {
  std::map<StateId, StateId> redirect;
  for (size_t i = 0; i < d.abstractStates.size(); ++i) {
    const AbstractState& a = d.abstractStates[i];
    if (redirect.contains(a.id)) continue;
    for (size_t j = i + 1; j < d.abstractStates.size(); ++j) {
      const AbstractState& b = d.abstractStates[j];
      if (redirect.contains(b.id) || b.windowId != a.windowId ||
          b.abstractionLevel != a.abstractionLevel) {
        continue;
      }
      std::multiset<std::pair<Valuations, int>> sa, sb;
      for (const auto& v : a.avms) sa.insert({v.valuations, v.cardinality});
      for (const auto& v : b.avms) sb.insert({v.valuations, v.cardinality});
      if (sa == sb) redirect[b.id] = a.id;
    }
  }
  if (redirect.empty()) return;
  for (auto& s : d.abstractStates) {
    auto it = redirect.find(s.id);
    if (it == redirect.end()) continue;
    AbstractState* keep = d.FindState(it->second);
    keep->observedInVersions.insert(s.observedInVersions.begin(),
                                    s.observedInVersions.end());
    keep->obsolete = keep->obsolete && s.obsolete;
  }
  for (auto& t : d.abstractTransitions) {
    if (auto it = redirect.find(t.destinationStateId); it != redirect.end()) {
      t.destinationStateId = it->second;
    }
    if (auto it = redirect.find(t.sourceStateId); it != redirect.end()) {
      // The source avm must be re-pointed at the equal avm of the survivor.
      const AbstractState* from = d.FindState(t.sourceStateId);
      const AbstractState* to = d.FindState(it->second);
      if (t.sourceAvmId) {
        const Avm* old = from->FindAvm(*t.sourceAvmId);
        auto same = std::find_if(to->avms.begin(), to->avms.end(),
                                 [&](const Avm& a) {
                                   return a.valuations == old->valuations;
                                 });
        t.sourceAvmId = same->id;
      }
      t.sourceStateId = it->second;
    }
  }
  std::set<StateId> initial;
  for (const auto& id : d.initialStateIds) {
    auto it = redirect.find(id);
    initial.insert(it == redirect.end() ? id : it->second);
  }
  d.initialStateIds = std::move(initial);
  std::erase_if(d.abstractStates, [&](const AbstractState& s) {
    return redirect.contains(s.id);
  });
  // Identical transitions may now coexist.
  std::vector<AbstractTransition> unique;
  for (auto& t : d.abstractTransitions) {
    bool dup = std::any_of(unique.begin(), unique.end(), [&](const auto& u) {
      return u.sourceStateId == t.sourceStateId &&
             u.sourceAvmId == t.sourceAvmId && u.actionType == t.actionType &&
             u.dataPayload == t.dataPayload &&
             u.destinationStateId == t.destinationStateId &&
             u.layoutGuard == t.layoutGuard;
    });
    if (!dup) unique.push_back(std::move(t));
  }
  d.abstractTransitions = std::move(unique);
}

void RemoveDisconnected(Dstg& d, const Ewtg& updated) {
  const Window* launcher = updated.Launcher();
  std::map<StateId, std::vector<StateId>> adj;
  for (const auto& t : d.abstractTransitions) {
    adj[t.sourceStateId].push_back(t.destinationStateId);
    adj[t.destinationStateId].push_back(t.sourceStateId);
  }
  std::set<StateId> keep;
  std::vector<StateId> stack;
  for (const auto& s : d.abstractStates) {
    bool root = d.initialStateIds.contains(s.id) ||
                (launcher != nullptr && s.windowId == launcher->id);
    if (root && keep.insert(s.id).second) stack.push_back(s.id);
  }
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (const auto& n : adj[s]) {
      if (keep.insert(n).second) stack.push_back(n);
    }
  }
  std::erase_if(d.abstractStates, [&](const AbstractState& s) {
    return !keep.contains(s.id);
  });
  std::erase_if(d.abstractTransitions, [&](const AbstractTransition& t) {
    return !keep.contains(t.sourceStateId);
  });
}

}  // namespace

ElementMaps MapsFromDiff(const DiffResult& diff, const Ewtg& base,
                         const Ewtg& updated) {
  ElementMaps maps;
  maps.windows = diff.Pairing(kWindowElement);
  maps.widgets = diff.Pairing(kWidgetElement);
  maps.transitions = diff.transitions.matched;
  MapInputs(base, updated, maps);
  return maps;
}

void CarryRuntimeElements(const Ewtg& base, Ewtg& updated, ElementMaps& maps) {
  for (const auto& w : base.windows) {
    if (!w.runtimeCreated || maps.windows.contains(w.id)) continue;
    const Window* same = updated.FindWindow(w.id);
    if (same != nullptr && same->kind == w.kind) {
      maps.windows[w.id] = same->id;
      continue;
    }
    Window copy = w;
    copy.widgetIds.clear();
    copy.id = FreshId(w.id, [&](const std::string& id) {
      return updated.FindWindow(id) != nullptr;
    });
    maps.windows[w.id] = copy.id;
    updated.windows.push_back(std::move(copy));
  }
  // Parents first so that parent links can be rebound.
  std::vector<const EwtgWidget*> pending;
  for (const auto& w : base.widgets) {
    if (w.runtimeCreated && !maps.widgets.contains(w.id)) pending.push_back(&w);
  }
  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const EwtgWidget& w = **it;
      const WindowId* win = Lookup(maps.windows, w.windowId);
      bool parent_ready = !w.parentId || maps.widgets.contains(*w.parentId) ||
                          std::none_of(pending.begin(), pending.end(),
                                       [&](const EwtgWidget* p) {
                                         return p->id == *w.parentId;
                                       });
      if (win == nullptr) {
        it = pending.erase(it);
        progress = true;
        continue;
      }
      if (!parent_ready) {
        ++it;
        continue;
      }
      const EwtgWidget* same = nullptr;
      for (const auto& u : updated.widgets) {
        if (u.windowId == *win && u.resourceId == w.resourceId &&
            u.className == w.className && u.xpath == w.xpath) {
          same = &u;
          break;
        }
      }
      if (same != nullptr) {
        maps.widgets[w.id] = same->id;
      } else {
        EwtgWidget copy = w;
        copy.windowId = *win;
        copy.parentId.reset();
        if (w.parentId) {
          if (const WidgetId* p = Lookup(maps.widgets, *w.parentId)) {
            copy.parentId = *p;
          }
        }
        copy.id = FreshId(w.id, [&](const std::string& id) {
          return updated.FindWidget(id) != nullptr;
        });
        maps.widgets[w.id] = copy.id;
        updated.FindWindow(*win)->widgetIds.insert(copy.id);
        updated.widgets.push_back(std::move(copy));
      }
      it = pending.erase(it);
      progress = true;
    }
  }
  for (const auto& in : base.inputs) {
    if (!in.runtimeCreated || maps.inputs.contains(in.id)) continue;
    const WindowId* win = Lookup(maps.windows, in.windowId);
    if (win == nullptr) continue;
    std::optional<WidgetId> widget;
    if (in.widgetId) {
      const WidgetId* x = Lookup(maps.widgets, *in.widgetId);
      if (x == nullptr) continue;
      widget = *x;
    }
    if (const Input* same = updated.ResolveInput(*win, widget, in.actionType)) {
      maps.inputs[in.id] = same->id;
      continue;
    }
    Input copy = in;
    copy.windowId = *win;
    copy.widgetId = widget;
    copy.id = FreshId(in.id, [&](const std::string& id) {
      return updated.FindInput(id) != nullptr;
    });
    maps.inputs[in.id] = copy.id;
    updated.inputs.push_back(std::move(copy));
  }
  MapInputs(base, updated, maps);
  for (const auto& t : base.windowTransitions) {
    if (!t.runtimeCreated || maps.transitions.contains(t.id)) continue;
    const WindowId* src = Lookup(maps.windows, t.sourceWindowId);
    const WindowId* dst = Lookup(maps.windows, t.destinationWindowId);
    const InputId* in = Lookup(maps.inputs, t.inputId);
    if (src == nullptr || dst == nullptr || in == nullptr) continue;
    auto same = std::find_if(
        updated.windowTransitions.begin(), updated.windowTransitions.end(),
        [&](const WindowTransition& u) {
          return u.inputId == *in && u.destinationWindowId == *dst;
        });
    if (same != updated.windowTransitions.end()) {
      maps.transitions[t.id] = same->id;
      continue;
    }
    WindowTransition copy = t;
    copy.sourceWindowId = *src;
    copy.destinationWindowId = *dst;
    copy.inputId = *in;
    copy.id = FreshId(t.id, [&](const std::string& id) {
      return updated.FindTransition(id) != nullptr;
    });
    maps.transitions[t.id] = copy.id;
    updated.windowTransitions.push_back(std::move(copy));
  }
}

Dstg UpdateDstg(const Dstg& dstg, const DiffResult& diff,
                const ElementMaps& maps, const Ewtg& updated) {
  Dstg d;
  // (a), (d): states follow their window or disappear with it.
  for (const auto& s : dstg.abstractStates) {
    const WindowId* w = Lookup(maps.windows, s.windowId);
    if (w == nullptr) continue;
    AbstractState copy = s;
    copy.windowId = *w;
    // (b), (e): avms follow their widget or disappear with it.
    copy.avms.clear();
    for (const auto& a : s.avms) {
      Avm avm = a;
      if (a.ewtgWidgetId) {
        const WidgetId* x = Lookup(maps.widgets, *a.ewtgWidgetId);
        if (x == nullptr) continue;
        avm.ewtgWidgetId = *x;
      }
      copy.avms.push_back(std::move(avm));
    }
    d.abstractStates.push_back(std::move(copy));
  }
  const std::set<TransitionId> deleted(diff.transitions.deleted.begin(),
                                       diff.transitions.deleted.end());
  for (const auto& t : dstg.abstractTransitions) {
    const AbstractState* src = d.FindState(t.sourceStateId);
    if (src == nullptr || d.FindState(t.destinationStateId) == nullptr) {
      continue;
    }
    if (t.sourceAvmId && src->FindAvm(*t.sourceAvmId) == nullptr) continue;
    AbstractTransition copy = t;
    if (t.windowTransitionId) {
      // (c) deleted and (f) replaced window transitions drop their
      // abstract transitions; only unchanged ones are carried.
      if (deleted.contains(*t.windowTransitionId) ||
          diff.transitions.replaced.contains(*t.windowTransitionId)) {
        continue;
      }
      const TransitionId* m = Lookup(maps.transitions, *t.windowTransitionId);
      if (m == nullptr) continue;
      copy.windowTransitionId = *m;
    }
    if (t.inputId) {
      const InputId* m = Lookup(maps.inputs, *t.inputId);
      copy.inputId = m == nullptr ? std::nullopt : std::optional(*m);
    }
    d.abstractTransitions.push_back(std::move(copy));
  }
  for (const auto& [win, level] : dstg.abstractionPolicy) {
    if (const WindowId* w = Lookup(maps.windows, win)) {
      d.abstractionPolicy[*w] = level;
    }
  }
  for (const auto& id : dstg.initialStateIds) {
    if (d.FindState(id) != nullptr) d.initialStateIds.insert(id);
  }
  MergeDuplicates(d);
  // (h)
  RemoveDisconnected(d, updated);
  return d;
}

Dstg UpdateDstg(const Dstg& dstg, const DiffResult& diff, const Ewtg& base,
                const Ewtg& updated) {
  CheckDiff(diff, base, updated);
  return UpdateDstg(dstg, diff, MapsFromDiff(diff, base, updated), updated);
}

AppModel AdaptModel(const AppModel& base, const Ewtg& updatedEwtg,
                    const DiffResult& diff, const VersionTag& updatedVersion) {
  CheckDiff(diff, base.ewtg, updatedEwtg);
  AppModel out;
  out.version = updatedVersion;
  out.ewtg = updatedEwtg;
  ElementMaps maps = MapsFromDiff(diff, base.ewtg, out.ewtg);
  CarryRuntimeElements(base.ewtg, out.ewtg, maps);
  out.dstg = UpdateDstg(base.dstg, diff, maps, out.ewtg);
  std::set<WidgetId> fresh = diff.AddedOrReplacedUpdatedWidgets();
  out.adaptation = AdaptationInfo{base.version, fresh};
  return out;
}

}  // namespace carryover
