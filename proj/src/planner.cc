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

#include "carryover/planner.h"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

namespace carryover {
namespace {

bool Plannable(ActionType type) {
  return type != ActionType::kResetApp && type != ActionType::kIntent;
}

const Avm* AvmFor(const AbstractState& s, const WidgetId& widget) {
  for (const auto& a : s.avms) {
    if (a.ewtgWidgetId == widget) return &a;
  }
  return nullptr;
}

// An AVM of `widget` whose widget accepts input (R_E is not false).
const Avm* EnabledAvmFor(const AbstractState& s, const WidgetId& widget) {
  for (const auto& a : s.avms) {
    if (a.ewtgWidgetId != widget) continue;
    auto e = a.valuations.find("R_E");
    if (e == a.valuations.end() || e->second != Valuation(false)) return &a;
  }
  return nullptr;
}

// Everything the search needs, computed once per episode.
class Episode {
 public:
  Episode(const AppModel& model, const PlannerConfig& config)
      : model_(model), config_(config) {
    for (const auto& s : model.dstg.abstractStates) {
      if (!s.obsolete) live_[s.windowId].push_back(&s);
    }
    for (const auto& t : model.dstg.abstractTransitions) {
      const AbstractState* dst = model.dstg.FindState(t.destinationStateId);
      auto in = InputOf(model, t);
      if (in) {
        exercised_[t.sourceStateId].insert(*in);
        if (dst != nullptr) destinations_[*in].insert(dst->windowId);
      }
    }
    for (const auto& t : model.ewtg.windowTransitions) {
      destinations_[t.inputId].insert(t.destinationWindowId);
    }
    for (const auto& s : model.dstg.initialStateIds) {
      const AbstractState* st = model.dstg.FindState(s);
      if (st != nullptr && !st->obsolete) initial_.push_back(st);
    }
  }

  const std::vector<const AbstractState*>& Live(const WindowId& w) const {
    static const std::vector<const AbstractState*> none;
    auto it = live_.find(w);
    return it == live_.end() ? none : it->second;
  }

  double Presence(const WindowId& w, const Input& in) const {
    if (!in.widgetId) return 1.0;
    const auto& states = Live(w);
    if (states.empty()) return config_.defaultProbability;
    int with = 0;
    for (const AbstractState* s : states) {
      if (AvmFor(*s, *in.widgetId) != nullptr) ++with;
    }
    return static_cast<double>(with) / static_cast<double>(states.size());
  }

  const std::set<WindowId>& Destinations(const InputId& in) const {
    static const std::set<WindowId> none;
    auto it = destinations_.find(in);
    return it == destinations_.end() ? none : it->second;
  }

  bool Exercised(const StateId& s, const InputId& in) const {
    auto it = exercised_.find(s);
    return it != exercised_.end() && it->second.contains(in);
  }

  const std::vector<const AbstractState*>& initial() const { return initial_; }

 private:
  const AppModel& model_;
  const PlannerConfig& config_;
  std::map<WindowId, std::vector<const AbstractState*>> live_;
  std::map<StateId, std::set<InputId>> exercised_;
  std::map<InputId, std::set<WindowId>> destinations_;
  std::vector<const AbstractState*> initial_;
};

struct NodeKey {
  enum Kind { kState, kMeta, kGoal } kind;
  std::string id;
  auto operator<=>(const NodeKey&) const = default;
};

struct Label {
  NodeKey node;
  double full = 0;
  double prob = 1;
  int metas = 0;
  int depth = 0;
  long parent = -1;
  PlannedStep step;
};

double CostOf(double full, double prob) {
  return full + full / 2 * (1 - prob);
}

Expected ExpectedAfter(const AppModel& model, const Episode& episode,
                       const AbstractState* from, const Input& in) {
  if (from != nullptr) {
    for (const auto& t : model.dstg.abstractTransitions) {
      if (t.sourceStateId != from->id || InputOf(model, t) != in.id) continue;
      const AbstractState* dst = model.dstg.FindState(t.destinationStateId);
      if (dst != nullptr && !dst->obsolete) return dst->id;
    }
  }
  const auto& dest = episode.Destinations(in.id);
  if (!dest.empty()) return MetaRef{*dest.begin()};
  return std::monostate{};
}

}  // namespace

std::optional<InputId> InputOf(const AppModel& model,
                               const AbstractTransition& transition) {
  if (transition.inputId) return transition.inputId;
  const AbstractState* src = model.dstg.FindState(transition.sourceStateId);
  if (src == nullptr) return std::nullopt;
  std::optional<WidgetId> widget;
  if (transition.sourceAvmId) {
    const Avm* avm = src->FindAvm(*transition.sourceAvmId);
    if (avm == nullptr || !avm->ewtgWidgetId) return std::nullopt;
    widget = avm->ewtgWidgetId;
  }
  const Input* in =
      model.ewtg.ResolveInput(src->windowId, widget, transition.actionType);
  if (in == nullptr) return std::nullopt;
  return in->id;
}

MetaState MetaStateOf(const AppModel& model, const WindowId& windowId) {
  MetaState m;
  m.windowId = windowId;
  std::vector<const AbstractState*> states;
  for (const auto& s : model.dstg.abstractStates) {
    if (s.windowId == windowId && !s.obsolete) states.push_back(&s);
  }
  if (states.empty()) return m;
  std::set<WidgetId> widgets;
  if (const Window* w = model.ewtg.FindWindow(windowId)) {
    widgets = w->widgetIds;
  }
  for (const AbstractState* s : states) {
    for (const auto& a : s->avms) {
      if (a.ewtgWidgetId) widgets.insert(*a.ewtgWidgetId);
    }
  }
  for (const auto& w : widgets) {
    int with = 0;
    for (const AbstractState* s : states) {
      if (AvmFor(*s, w) != nullptr) ++with;
    }
    m.widgetPresence[w] =
        static_cast<double>(with) / static_cast<double>(states.size());
  }
  return m;
}

std::vector<MetaState> BuildMetaStates(const AppModel& model,
                                       const InputId& input) {
  std::set<WindowId> windows;
  for (const auto& t : model.dstg.abstractTransitions) {
    if (InputOf(model, t) != input) continue;
    if (const AbstractState* d = model.dstg.FindState(t.destinationStateId)) {
      windows.insert(d->windowId);
    }
  }
  for (const auto& t : model.ewtg.windowTransitions) {
    if (t.inputId == input) windows.insert(t.destinationWindowId);
  }
  std::vector<MetaState> out;
  for (const auto& w : windows) {
    MetaState m = MetaStateOf(model, w);
    m.sourceInputId = input;
    out.push_back(std::move(m));
  }
  return out;
}

SequenceCostBreakdown SequenceCost(const std::vector<ActionType>& actions,
                                   const std::vector<double>& probabilities) {
  SequenceCostBreakdown out;
  double product = 1;
  for (size_t i = 0; i < actions.size(); ++i) {
    out.costFull += ActionCost(actions[i]);
    product *= i < probabilities.size() ? probabilities[i] : 1.0;
  }
  out.costPartial = out.costFull / 2;
  out.likelihoodPartial = 1 - product;
  out.cost = out.costFull + out.costPartial * out.likelihoodPartial;
  return out;
}

SequenceCostBreakdown SequenceCost(const std::vector<PlannedStep>& steps) {
  std::vector<ActionType> actions;
  std::vector<double> probabilities;
  for (const auto& s : steps) {
    actions.push_back(s.actionType);
    probabilities.push_back(s.probability);
  }
  return SequenceCost(actions, probabilities);
}

bool GuardSatisfied(const LayoutFingerprint& guard,
                    const std::vector<LayoutFingerprint>& visitedLayouts,
                    double threshold) {
  return std::any_of(visitedLayouts.begin(), visitedLayouts.end(),
                     [&](const LayoutFingerprint& v) {
                       return LayoutSimilarity(guard, v) >= threshold;
                     });
}

std::optional<ActionSequence> PlanToTarget(
    const AppModel& model, const StateId& current, const PlanTarget& target,
    const std::vector<LayoutFingerprint>& visitedLayouts,
    const PlannerConfig& config, const std::vector<StateId>& extraOrigins) {
  Episode episode(model, config);
  const Dstg& dstg = model.dstg;
  const Ewtg& ewtg = model.ewtg;

  auto window_of = [&](const NodeKey& n) -> WindowId {
    if (n.kind == NodeKey::kMeta) return n.id;
    const AbstractState* s = dstg.FindState(n.id);
    return s == nullptr ? WindowId() : s->windowId;
  };
  auto reached = [&](const NodeKey& n) {
    if (n.kind == NodeKey::kGoal) return true;
    if (const auto* w = std::get_if<WindowTarget>(&target)) {
      return window_of(n) == w->id;
    }
    if (const auto* s = std::get_if<StateTarget>(&target)) {
      return n.kind == NodeKey::kState && n.id == s->id;
    }
    return false;
  };
  const Input* target_input = nullptr;
  if (const auto* t = std::get_if<InputTarget>(&target)) {
    target_input = ewtg.FindInput(t->id);
    if (target_input == nullptr) return std::nullopt;
  }

  std::vector<StateId> origins{current};
  for (const auto& o : extraOrigins) {
    if (std::find(origins.begin(), origins.end(), o) == origins.end()) {
      origins.push_back(o);
    }
  }

  std::vector<Label> labels;
  std::map<NodeKey, std::vector<std::pair<double, double>>> frontier;
  using Entry = std::tuple<double, int, long>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

  auto push = [&](Label label) {
    if (label.full > config.maxFullCost) return;
    auto& seen = frontier[label.node];
    for (const auto& [f, p] : seen) {
      if (f <= label.full && p >= label.prob) return;
    }
    std::erase_if(seen, [&](const auto& fp) {
      return label.full <= fp.first && label.prob >= fp.second;
    });
    seen.emplace_back(label.full, label.prob);
    labels.push_back(std::move(label));
    const Label& l = labels.back();
    queue.emplace(CostOf(l.full, l.prob), l.metas,
                  static_cast<long>(labels.size() - 1));
  };

  for (const auto& o : origins) {
    const AbstractState* s = dstg.FindState(o);
    if (s == nullptr) continue;
    Label l;
    l.node = {NodeKey::kState, o};
    push(l);
  }

  auto extend = [&](long from, NodeKey to, PlannedStep step, bool meta) {
    const Label& f = labels[from];
    Label l;
    l.node = std::move(to);
    l.full = f.full + ActionCost(step.actionType);
    l.prob = f.prob * step.probability;
    l.metas = f.metas + (meta ? 1 : 0);
    l.depth = f.depth + 1;
    l.parent = from;
    l.step = std::move(step);
    push(std::move(l));
  };

  while (!queue.empty()) {
    auto [cost, metas, index] = queue.top();
    queue.pop();
    const Label label = labels[index];
    if (reached(label.node)) {
      std::vector<PlannedStep> steps;
      long at = index;
      StateId origin;
      while (labels[at].parent >= 0) {
        steps.push_back(labels[at].step);
        at = labels[at].parent;
      }
      origin = labels[at].node.id;
      std::reverse(steps.begin(), steps.end());
      ActionSequence seq;
      seq.steps = std::move(steps);
      seq.origin = origin;
      auto b = SequenceCost(seq.steps);
      seq.costFull = b.costFull;
      seq.costPartial = b.costPartial;
      seq.likelihoodPartial = b.likelihoodPartial;
      seq.cost = b.cost;
      seq.probabilistic = std::any_of(
          seq.steps.begin(), seq.steps.end(), [](const PlannedStep& s) {
            return std::holds_alternative<MetaRef>(s.expected) ||
                   s.probability < 1;
          });
      return seq;
    }

    if (label.node.kind == NodeKey::kState) {
      const AbstractState* s = dstg.FindState(label.node.id);
      // Recorded transitions.
      for (const auto& t : dstg.abstractTransitions) {
        if (t.sourceStateId != s->id) continue;
        const AbstractState* dst = dstg.FindState(t.destinationStateId);
        if (dst == nullptr || dst->obsolete) continue;
        if (t.layoutGuard &&
            !GuardSatisfied(*t.layoutGuard, visitedLayouts,
                            config.layoutThreshold)) {
          continue;
        }
        PlannedStep step;
        step.actionType = t.actionType;
        step.inputId = InputOf(model, t);
        if (t.sourceAvmId) {
          const Avm* avm = s->FindAvm(*t.sourceAvmId);
          if (avm != nullptr) step.widgetId = avm->ewtgWidgetId;
        }
        step.dataPayload = t.dataPayload;
        step.sourceStateId = s->id;
        step.sourceAvmId = t.sourceAvmId;
        step.expected = dst->id;
        step.abstractTransitionId = t.id;
        step.guarded = t.layoutGuard.has_value();
        extend(index, {NodeKey::kState, dst->id}, std::move(step), false);
      }
      // MetaTransitions for inputs never exercised here, and the target
      // input itself.
      for (const Input* in : ewtg.InputsOf(s->windowId)) {
        if (!Plannable(in->actionType)) continue;
        const Avm* avm = nullptr;
        if (in->widgetId) {
          avm = EnabledAvmFor(*s, *in->widgetId);
          if (avm == nullptr) continue;
        }
        PlannedStep step;
        step.actionType = in->actionType;
        step.inputId = in->id;
        step.widgetId = in->widgetId;
        step.sourceStateId = s->id;
        if (avm != nullptr) step.sourceAvmId = avm->id;
        if (in == target_input) {
          PlannedStep goal = step;
          goal.expected = ExpectedAfter(model, episode, s, *in);
          extend(index, {NodeKey::kGoal, ""}, std::move(goal), false);
        }
        if (episode.Exercised(s->id, in->id)) continue;
        for (const auto& w : episode.Destinations(in->id)) {
          PlannedStep meta = step;
          meta.expected = MetaRef{w};
          extend(index, {NodeKey::kMeta, w}, std::move(meta), true);
        }
      }
    } else if (label.node.kind == NodeKey::kMeta) {
      const WindowId& win = label.node.id;
      for (const Input* in : ewtg.InputsOf(win)) {
        if (!Plannable(in->actionType)) continue;
        PlannedStep step;
        step.actionType = in->actionType;
        step.inputId = in->id;
        step.widgetId = in->widgetId;
        step.sourceMetaWindow = win;
        step.probability = episode.Presence(win, *in);
        if (in == target_input) {
          PlannedStep goal = step;
          goal.expected = ExpectedAfter(model, episode, nullptr, *in);
          extend(index, {NodeKey::kGoal, ""}, std::move(goal), false);
        }
        for (const auto& w : episode.Destinations(in->id)) {
          PlannedStep meta = step;
          meta.expected = MetaRef{w};
          extend(index, {NodeKey::kMeta, w}, std::move(meta), true);
        }
      }
    }

    // Resetting the app is only worth it as the first action.
    if (label.depth == 0) {
      PlannedStep step;
      step.actionType = ActionType::kResetApp;
      for (const auto& in : ewtg.inputs) {
        if (in.actionType == ActionType::kResetApp) step.inputId = in.id;
      }
      const auto& initial = episode.initial();
      if (initial.size() == 1) {
        step.expected = initial.front()->id;
        extend(index, {NodeKey::kState, initial.front()->id}, step, false);
      } else if (const Window* launcher = ewtg.Launcher()) {
        step.expected = MetaRef{launcher->id};
        extend(index, {NodeKey::kMeta, launcher->id}, step, true);
      }
    }
  }
  return std::nullopt;
}

std::string Describe(const ActionSequence& sequence) {
  std::ostringstream out;
  out << (sequence.probabilistic ? "probabilistic" : "deterministic")
      << " sequence from " << sequence.origin << ", "
      << sequence.steps.size() << " steps\n";
  for (size_t i = 0; i < sequence.steps.size(); ++i) {
    const PlannedStep& s = sequence.steps[i];
    out << "  " << i + 1 << ". " << ToString(s.actionType);
    if (s.inputId) out << " " << *s.inputId;
    if (s.sourceStateId) out << " from " << *s.sourceStateId;
    if (s.sourceMetaWindow) out << " from meta(" << *s.sourceMetaWindow << ")";
    if (const auto* st = std::get_if<StateId>(&s.expected)) {
      out << " -> " << *st;
    } else if (const auto* m = std::get_if<MetaRef>(&s.expected)) {
      out << " -> meta(" << m->windowId << ")";
    }
    out << " p=" << s.probability;
    if (s.abstractTransitionId) out << " via " << *s.abstractTransitionId;
    if (s.guarded) out << " [guarded]";
    out << "\n";
  }
  out << "cost_full=" << sequence.costFull
      << " cost_partial=" << sequence.costPartial
      << " likelihood_partial=" << sequence.likelihoodPartial
      << " cost=" << sequence.cost << "\n";
  return out.str();
}

}  // namespace carryover
