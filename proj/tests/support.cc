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

#include "support.h"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>

#include <unistd.h>

#include "carryover/abstraction.h"

#ifndef CARRYOVER_FIXTURE_DIR
#error "CARRYOVER_FIXTURE_DIR must be defined"
#endif

namespace carryover::testing {

std::filesystem::path FixturePath(const std::string& name) {
  return std::filesystem::path(CARRYOVER_FIXTURE_DIR) / name;
}

std::filesystem::path ScratchDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("carryover_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Valuations L1Valuation(const std::string& resourceId,
                       const std::string& className, bool clickable,
                       bool enabled) {
  return {{"R_C", clickable},   {"R_CD", std::string()},
          {"R_CN", className},  {"R_Ch", false},
          {"R_E", enabled},     {"R_I", false},
          {"R_LC", false},      {"R_P", false},
          {"R_RID", resourceId}, {"R_Scrollable", false},
          {"R_Selected", false}};
}

namespace {

int Uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool Chance(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0, 1)(rng) < p;
}

}  // namespace

AppModel RandomPlanningModel(std::mt19937_64& rng, int maxStates) {
  AppModel m;
  m.version = "v1";
  const int windows = Uniform(rng, 2, 4);
  std::map<WindowId, std::vector<WidgetId>> widgets_of;
  int widget_no = 0;
  int input_no = 0;
  for (int w = 0; w < windows; ++w) {
    Window win;
    win.id = "win" + std::to_string(w);
    win.name = win.id;
    win.kind = w == 0 ? WindowKind::kLauncher : WindowKind::kActivity;
    win.className = "app." + win.id;
    const int n = Uniform(rng, 2, 4);
    for (int k = 0; k < n; ++k) {
      EwtgWidget wd;
      wd.id = "w" + std::to_string(widget_no++);
      wd.windowId = win.id;
      wd.className = "android.widget.Button";
      wd.resourceId = "r" + wd.id;
      wd.xpath = "android.widget.FrameLayout/android.widget.Button";
      win.widgetIds.insert(wd.id);
      widgets_of[win.id].push_back(wd.id);
      Input in;
      in.id = "i" + std::to_string(input_no++);
      in.windowId = win.id;
      in.widgetId = wd.id;
      in.actionType = Chance(rng, 0.2) ? ActionType::kLongClick
                                       : ActionType::kClick;
      in.handlerMethodIds = {"M." + in.id};
      m.ewtg.inputs.push_back(in);
      m.ewtg.widgets.push_back(std::move(wd));
    }
    if (Chance(rng, 0.5)) {
      Input back;
      back.id = "i" + std::to_string(input_no++);
      back.windowId = win.id;
      back.actionType = ActionType::kPressBack;
      m.ewtg.inputs.push_back(back);
    }
    m.ewtg.windows.push_back(std::move(win));
  }
  int wt_no = 0;
  for (const auto& in : m.ewtg.inputs) {
    if (!Chance(rng, 0.5)) continue;
    WindowTransition t;
    t.id = "t" + std::to_string(wt_no++);
    t.sourceWindowId = in.windowId;
    t.destinationWindowId = "win" + std::to_string(Uniform(rng, 0, windows - 1));
    t.inputId = in.id;
    m.ewtg.windowTransitions.push_back(std::move(t));
  }

  const int states = Uniform(rng, 2, maxStates);
  int avm_no = 0;
  for (int s = 0; s < states; ++s) {
    AbstractState st;
    st.id = "s" + std::to_string(s);
    st.windowId = s == 0 ? "win0"
                         : "win" + std::to_string(Uniform(rng, 0, windows - 1));
    for (const auto& w : widgets_of[st.windowId]) {
      if (!Chance(rng, 0.7)) continue;
      Avm a;
      a.id = "avm" + std::to_string(avm_no++);
      a.ewtgWidgetId = w;
      a.valuations = L1Valuation("r" + w, "android.widget.Button", true,
                                 !Chance(rng, 0.15));
      st.avms.push_back(std::move(a));
    }
    st.obsolete = s != 0 && Chance(rng, 0.1);
    st.observedInVersions = {"v1"};
    m.dstg.abstractStates.push_back(std::move(st));
  }
  m.dstg.initialStateIds = {"s0"};

  int at_no = 0;
  for (const auto& st : m.dstg.abstractStates) {
    for (const auto& a : st.avms) {
      if (!Chance(rng, 0.5)) continue;
      const Input* in =
          m.ewtg.ResolveInput(st.windowId, a.ewtgWidgetId, ActionType::kClick);
      if (in == nullptr) {
        in = m.ewtg.ResolveInput(st.windowId, a.ewtgWidgetId,
                                 ActionType::kLongClick);
      }
      if (in == nullptr) continue;
      AbstractTransition t;
      t.id = "at" + std::to_string(at_no++);
      t.sourceStateId = st.id;
      t.sourceAvmId = a.id;
      t.actionType = in->actionType;
      t.inputId = in->id;
      t.destinationStateId = "s" + std::to_string(Uniform(rng, 0, states - 1));
      t.provenanceVersion = "v1";
      m.dstg.abstractTransitions.push_back(std::move(t));
    }
  }
  for (auto& t : m.dstg.abstractTransitions) {
    if (!Chance(rng, 0.15)) continue;
    const auto& g = m.dstg.abstractStates[Uniform(rng, 0, states - 1)];
    t.layoutGuard = LayoutOf(g);
  }
  return m;
}

namespace {

double Jaccard(const LayoutFingerprint& a, const LayoutFingerprint& b) {
  int inter = 0;
  int uni = 0;
  std::set<Valuations> keys;
  for (const auto& [k, n] : a) keys.insert(k);
  for (const auto& [k, n] : b) keys.insert(k);
  for (const auto& k : keys) {
    auto x = a.find(k);
    auto y = b.find(k);
    const int na = x == a.end() ? 0 : x->second;
    const int nb = y == b.end() ? 0 : y->second;
    inter += std::min(na, nb);
    uni += std::max(na, nb);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

bool Enabled(const Avm& a) {
  auto e = a.valuations.find("R_E");
  return e == a.valuations.end() || e->second != Valuation(false);
}

struct Oracle {
  const AppModel& model;
  const PlanTarget& target;
  const std::vector<LayoutFingerprint>& visited;
  size_t maxLength;
  double threshold;
  double defaultP;

  std::optional<OracleResult> best;

  // Node: a state id, or a window id when `meta`.
  struct Node {
    bool meta;
    std::string id;
  };

  WindowId WindowOf(const Node& n) const {
    if (n.meta) return n.id;
    return model.dstg.FindState(n.id)->windowId;
  }

  bool Live(const StateId& id) const {
    const AbstractState* s = model.dstg.FindState(id);
    return s != nullptr && !s->obsolete;
  }

  std::set<WindowId> Destinations(const InputId& in) const {
    std::set<WindowId> out;
    for (const auto& t : model.dstg.abstractTransitions) {
      if (t.inputId != in) continue;
      if (const AbstractState* d = model.dstg.FindState(t.destinationStateId)) {
        out.insert(d->windowId);
      }
    }
    for (const auto& t : model.ewtg.windowTransitions) {
      if (t.inputId == in) out.insert(t.destinationWindowId);
    }
    return out;
  }

  double Presence(const WindowId& w, const Input& in) const {
    if (!in.widgetId) return 1;
    int live = 0;
    int with = 0;
    for (const auto& s : model.dstg.abstractStates) {
      if (s.windowId != w || s.obsolete) continue;
      ++live;
      for (const auto& a : s.avms) {
        if (a.ewtgWidgetId == in.widgetId) {
          ++with;
          break;
        }
      }
    }
    return live == 0 ? defaultP : static_cast<double>(with) / live;
  }

  bool IsTarget(const Node& n) const {
    if (const auto* w = std::get_if<WindowTarget>(&target)) {
      return WindowOf(n) == w->id;
    }
    if (const auto* s = std::get_if<StateTarget>(&target)) {
      return !n.meta && n.id == s->id;
    }
    return false;
  }

  void Record(double full, double prob, size_t length) {
    const double cost = full + full / 2 * (1 - prob);
    if (!best || cost < best->cost - 1e-12) best = OracleResult{cost, length};
  }

  static bool Plannable(const Input& in) {
    return in.actionType != ActionType::kResetApp &&
           in.actionType != ActionType::kIntent;
  }

  void Walk(const Node& n, double full, double prob, size_t depth) {
    if (IsTarget(n)) Record(full, prob, depth);
    if (depth == maxLength) return;
    const InputId* goal = nullptr;
    if (const auto* t = std::get_if<InputTarget>(&target)) goal = &t->id;
    const WindowId win = WindowOf(n);
    if (!n.meta) {
      const AbstractState& s = *model.dstg.FindState(n.id);
      std::set<InputId> used;
      for (const auto& t : model.dstg.abstractTransitions) {
        if (t.sourceStateId != s.id) continue;
        if (t.inputId) used.insert(*t.inputId);
        if (!Live(t.destinationStateId)) continue;
        if (t.layoutGuard) {
          bool ok = false;
          for (const auto& v : visited) {
            ok = ok || Jaccard(*t.layoutGuard, v) >= threshold;
          }
          if (!ok) continue;
        }
        Walk({false, t.destinationStateId}, full + ActionCost(t.actionType),
             prob, depth + 1);
      }
      for (const auto& in : model.ewtg.inputs) {
        if (in.windowId != win || !Plannable(in)) continue;
        if (in.widgetId) {
          bool ok = false;
          for (const auto& a : s.avms) {
            ok = ok || (a.ewtgWidgetId == in.widgetId && Enabled(a));
          }
          if (!ok) continue;
        }
        const double f = full + ActionCost(in.actionType);
        if (goal != nullptr && *goal == in.id) Record(f, prob, depth + 1);
        if (used.contains(in.id)) continue;
        for (const auto& d : Destinations(in.id)) {
          Walk({true, d}, f, prob, depth + 1);
        }
      }
    } else {
      for (const auto& in : model.ewtg.inputs) {
        if (in.windowId != win || !Plannable(in)) continue;
        const double f = full + ActionCost(in.actionType);
        const double p = prob * Presence(win, in);
        if (goal != nullptr && *goal == in.id) Record(f, p, depth + 1);
        for (const auto& d : Destinations(in.id)) {
          Walk({true, d}, f, p, depth + 1);
        }
      }
    }
    if (depth == 0) {
      std::vector<StateId> initial;
      for (const auto& id : model.dstg.initialStateIds) {
        if (Live(id)) initial.push_back(id);
      }
      const double f = full + ActionCost(ActionType::kResetApp);
      if (initial.size() == 1) {
        Walk({false, initial[0]}, f, prob, depth + 1);
      } else if (const Window* l = model.ewtg.Launcher()) {
        Walk({true, l->id}, f, prob, depth + 1);
      }
    }
  }
};

}  // namespace

std::optional<OracleResult> ExhaustiveMinimum(
    const AppModel& model, const StateId& current, const PlanTarget& target,
    const std::vector<LayoutFingerprint>& visitedLayouts, size_t maxLength,
    double layoutThreshold, double defaultProbability) {
  Oracle o{model,     target,          visitedLayouts, maxLength,
           layoutThreshold, defaultProbability, std::nullopt};
  if (model.dstg.FindState(current) == nullptr) return std::nullopt;
  o.Walk({false, current}, 0, 1, 0);
  return o.best;
}

}  // namespace carryover::testing
