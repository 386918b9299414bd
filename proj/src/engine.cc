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

#include "carryover/engine.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "carryover/offline.h"

namespace carryover {

int TargetSet::TotalInstructions() const {
  int total = 0;
  for (const auto& m : methodIds) {
    auto it = instructionCounts.find(m);
    if (it != instructionCounts.end()) total += it->second;
  }
  return total;
}

int CountInstructions(const InstructionSet& set) {
  int n = 0;
  for (const auto& [m, lines] : set) n += static_cast<int>(lines.size());
  return n;
}

InstructionSet CoverageLedger::Record(const InstructionSet& executed) {
  InstructionSet fresh;
  for (const auto& [m, lines] : executed) {
    if (!targets_.methodIds.contains(m)) continue;
    auto& covered = covered_[m];
    for (int i : lines) {
      if (covered.insert(i).second) fresh[m].insert(i);
    }
  }
  executed_.push_back(executed);
  newly_.push_back(fresh);
  return fresh;
}

int CoverageLedger::CoveredInstructions() const {
  return CountInstructions(covered_);
}

int CoverageLedger::CoveredMethods() const {
  int n = 0;
  for (const auto& [m, lines] : covered_) {
    if (!lines.empty()) ++n;
  }
  return n;
}

double CoverageLedger::MethodCoverage() const {
  if (targets_.methodIds.empty()) return 0;
  return 100.0 * CoveredMethods() /
         static_cast<double>(targets_.methodIds.size());
}

double CoverageLedger::InstructionCoverage() const {
  int total = targets_.TotalInstructions();
  if (total == 0) return 0;
  return 100.0 * CoveredInstructions() / total;
}

std::string_view ToString(Outcome outcome) {
  switch (outcome) {
    case Outcome::kAsExpected:
      return "as-expected";
    case Outcome::kBackwardEquivalent:
      return "backward-equivalent";
    case Outcome::kMismatch:
      return "mismatch";
  }
  return "?";
}

AbstractState AbstractTree(const AppModel& model, const GuiTree& tree) {
  return DeriveAbstractState(tree, model.dstg.LevelOf(tree.windowId),
                             AssociateWidgets(tree.root, model.ewtg,
                                              tree.windowId));
}

namespace {

bool Interactable(const GuiNode& n) {
  return n.clickable || n.longClickable || n.scrollable || n.isInputField;
}

constexpr int kMaxIdleRounds = 50;

struct Aborted {
  std::string reason;
};

class Session {
 public:
  Session(AppModel model, const TargetSet& targets, Driver& driver,
          const EngineConfig& config)
      : driver_(driver), config_(config), rng_(config.seed) {
    r_.model = std::move(model);
    r_.model.gstg = {};
    r_.ledger = CoverageLedger(targets);
    for (const auto& s : dstg().abstractStates) {
      inherited_.insert(s.id);
      stateIds_.Observe(s.id);
      for (const auto& a : s.avms) avmIds_.Observe(a.id);
      if (s.obsolete) flaggedWindows_.insert(s.windowId);
    }
    for (const auto& t : dstg().abstractTransitions) atIds_.Observe(t.id);
    for (const auto& w : ewtg().widgets) rtWidgets_.Observe(w.id);
    for (const auto& i : ewtg().inputs) rtInputs_.Observe(i.id);
    for (const auto& t : ewtg().windowTransitions) rtTransitions_.Observe(t.id);
    if (r_.model.adaptation) {
      addedOrReplaced_ = r_.model.adaptation->addedOrReplacedWidgetIds;
    }
  }

  SessionResult Run() {
    const int budget = std::max(0, config_.budget);
    if (budget == 0) return std::move(r_);
    try {
      StepResult start = driver_.Reset();
      Observe(start.observation, true);
      double share = 0;
      std::array<int, 3> limits{};
      for (int k = 0; k < 3; ++k) {
        share += config_.phaseCaps[k];
        limits[k] = std::min(budget, static_cast<int>(std::floor(
                                         share * budget + 1e-9)));
      }
      limits[2] = budget;
      Phase1(limits[0]);
      Phase2(limits[1], 2);
      Phase3(limits[2]);
      int rejections = 0;
      while (Left(budget) && rejections < 100) {
        if (!EnsureInApp(4, budget)) break;
        if (!Left(budget)) break;
        rejections = RandomStep(4) ? 0 : rejections + 1;
      }
    } catch (const Aborted& a) {
      r_.aborted = true;
      r_.abortReason = a.reason;
    }
    Finish();
    return std::move(r_);
  }

 private:
  Dstg& dstg() { return r_.model.dstg; }
  Ewtg& ewtg() { return r_.model.ewtg; }
  Gstg& gstg() { return r_.model.gstg; }
  const GuiTree& CurrentTree() const { return r_.model.gstg.guiTrees.back(); }
  const StateId& CurrentStateId() const {
    return CurrentTree().abstractStateId;
  }
  const AbstractState& CurrentState() const {
    return *r_.model.dstg.FindState(CurrentStateId());
  }
  bool Left(int limit) const { return r_.executedActions < limit; }

  WindowKind KindOf(const WindowId& w) const {
    const Window* win = r_.model.ewtg.FindWindow(w);
    return win == nullptr ? WindowKind::kActivity : win->kind;
  }

  bool Tiny(const GuiNode& n) const {
    return n.boundsHint && (n.boundsHint->width < config_.minWidgetSide ||
                            n.boundsHint->height < config_.minWidgetSide);
  }

  bool Capable(const GuiNode& n, ActionType type) const {
    if (!n.enabled || Tiny(n)) return false;
    switch (type) {
      case ActionType::kClick:
      case ActionType::kItemClick:
        return n.clickable;
      case ActionType::kLongClick:
      case ActionType::kItemLongClick:
        return n.longClickable;
      case ActionType::kSwipe:
        return n.scrollable;
      case ActionType::kTextFill:
        return n.isInputField;
      default:
        return false;
    }
  }

  // --- Observation ---------------------------------------------------------

  void EnsureWindow(const Observation& o) {
    if (ewtg().FindWindow(o.tree.windowId) != nullptr) return;
    ewtg().windows.push_back({o.tree.windowId, o.windowName, o.kind,
                              o.className, true, {}});
  }

  void EnsureRuntimeWidgets(const GuiTree& tree) {
    for (;;) {
      WidgetAssociation assoc =
          AssociateWidgets(tree.root, ewtg(), tree.windowId);
      std::optional<EwtgWidget> fresh;
      ForEachNode(tree.root, [&](const std::string& path, const GuiNode& n,
                                 const std::string& xpath) {
        if (fresh || !IsAbstracted(n) || !Interactable(n)) return;
        if (assoc.contains(path)) return;
        fresh = EwtgWidget{"", tree.windowId, n.className, n.resourceId,
                           n.contentDescription, xpath, std::nullopt, true};
      });
      if (!fresh) return;
      fresh->id = rtWidgets_.Next();
      ewtg().FindWindow(tree.windowId)->widgetIds.insert(fresh->id);
      ewtg().widgets.push_back(std::move(*fresh));
    }
  }

  StateId Intern(AbstractState derived) {
    for (auto& s : dstg().abstractStates) {
      if (s.windowId != derived.windowId ||
          s.abstractionLevel != derived.abstractionLevel) {
        continue;
      }
      if (StatesEqual(s, derived)) {
        s.obsolete = false;
        s.observedInVersions.insert(r_.model.version);
        for (auto& a : s.avms) {
          if (a.ewtgWidgetId) continue;
          for (const auto& d : derived.avms) {
            if (d.valuations == a.valuations) a.ewtgWidgetId = d.ewtgWidgetId;
          }
        }
        observed_.insert(s.id);
        return s.id;
      }
    }
    derived.id = stateIds_.Next();
    for (auto& a : derived.avms) a.id = avmIds_.Next();
    derived.observedInVersions.insert(r_.model.version);
    observed_.insert(derived.id);
    dstg().abstractStates.push_back(std::move(derived));
    return dstg().abstractStates.back().id;
  }

  void Observe(const Observation& o, bool afterReset) {
    EnsureWindow(o);
    GuiTree tree = o.tree;
    tree.id = treeIds_.Next();
    tree.sessionIndex = static_cast<int>(gstg().guiTrees.size());
    EnsureRuntimeWidgets(tree);
    tree.abstractStateId = Intern(AbstractTree(r_.model, tree));
    if (afterReset) dstg().initialStateIds.insert(tree.abstractStateId);
    gstg().guiTrees.push_back(std::move(tree));
  }

  // --- Recording -----------------------------------------------------------

  std::optional<InputId> LearnInput(const GuiTree& before, const Action& a,
                                    const InstructionSet& executed) {
    std::optional<WidgetId> widget;
    if (a.concreteNodePath) {
      WidgetAssociation assoc =
          AssociateWidgets(before.root, ewtg(), before.windowId);
      auto it = assoc.find(*a.concreteNodePath);
      if (it == assoc.end()) return a.inputId;
      widget = it->second;
    }
    std::set<MethodId> methods;
    for (const auto& [m, lines] : executed) methods.insert(m);
    for (auto& in : ewtg().inputs) {
      if (in.windowId == before.windowId && in.widgetId == widget &&
          in.actionType == a.actionType) {
        if (in.runtimeCreated) {
          in.handlerMethodIds.insert(methods.begin(), methods.end());
        }
        return in.id;
      }
    }
    ewtg().inputs.push_back({rtInputs_.Next(), before.windowId, widget,
                             a.actionType, methods, true});
    return ewtg().inputs.back().id;
  }

  void EnsureWindowTransition(const InputId& input, const WindowId& from,
                              const WindowId& to, ActionType type) {
    if (from == to || type == ActionType::kPressBack ||
        type == ActionType::kResetApp) {
      return;
    }
    for (const auto& t : ewtg().windowTransitions) {
      if (t.inputId == input && t.destinationWindowId == to) return;
    }
    ewtg().windowTransitions.push_back(
        {rtTransitions_.Next(), from, to, input, true});
  }

  std::optional<TransitionId> RecordTransition(size_t i) {
    const TraceStep& step = gstg().actions[i];
    if (step.action.actionType == ActionType::kResetApp) return std::nullopt;
    const GuiTree& from = gstg().guiTrees[i];
    const GuiTree& to = gstg().guiTrees[i + 1];
    const AbstractState* src = dstg().FindState(from.abstractStateId);
    const AbstractState* dst = dstg().FindState(to.abstractStateId);
    AbstractTransition t;
    t.sourceStateId = src->id;
    t.destinationStateId = dst->id;
    t.actionType = step.action.actionType;
    t.dataPayload = step.action.dataPayload;
    t.provenanceVersion = r_.model.version;
    t.inputId = step.action.inputId;
    if (step.action.concreteNodePath) {
      const GuiNode* node = NodeAt(from.root, *step.action.concreteNodePath);
      if (node != nullptr && IsAbstracted(*node)) {
        Valuations v = Valuate(*node, src->abstractionLevel);
        for (const auto& a : src->avms) {
          if (a.valuations == v) t.sourceAvmId = a.id;
        }
      }
    }
    if (t.inputId) {
      for (const auto& w : ewtg().windowTransitions) {
        if (w.inputId == *t.inputId &&
            w.destinationWindowId == dst->windowId) {
          t.windowTransitionId = w.id;
          break;
        }
      }
    }
    if (IsOverlay(KindOf(src->windowId))) {
      t.layoutGuard = MakeLayoutGuard(*dst, gstg(), dstg(), i,
                                      config_.planner.layoutThreshold);
    }
    for (const auto& e : dstg().abstractTransitions) {
      if (e.sourceStateId == t.sourceStateId &&
          e.destinationStateId == t.destinationStateId &&
          e.sourceAvmId == t.sourceAvmId && e.actionType == t.actionType &&
          e.dataPayload == t.dataPayload && e.layoutGuard == t.layoutGuard &&
          e.inputId == t.inputId) {
        return e.id;
      }
    }
    t.id = atIds_.Next();
    dstg().abstractTransitions.push_back(std::move(t));
    return dstg().abstractTransitions.back().id;
  }

  // Performs `a`; returns the observed state, or nullopt when the driver
  // rejected the action.
  std::optional<StateId> Execute(Action a, int phase,
                                 const PlannedStep* planned) {
    const GuiTree before = CurrentTree();
    StepResult result;
    try {
      result = a.actionType == ActionType::kResetApp ? driver_.Reset()
                                                     : driver_.Perform(a);
    } catch (const DriverRejection&) {
      return std::nullopt;
    } catch (const DriverError& e) {
      throw Aborted{e.what()};
    }
    ++r_.executedActions;
    r_.actionPhases.push_back(phase);
    if (a.actionType != ActionType::kResetApp) {
      a.inputId = LearnInput(before, a, result.executed);
    }
    Observe(result.observation, a.actionType == ActionType::kResetApp);
    const GuiTree& after = CurrentTree();
    gstg().actions.push_back({before.id, a, after.id});
    const size_t index = gstg().actions.size() - 1;
    if (a.inputId) {
      EnsureWindowTransition(*a.inputId, before.windowId, after.windowId,
                             a.actionType);
      triggered_.insert(*a.inputId);
    }
    RecordTransition(index);
    for (const GuiTree* t : {&before, &after}) {
      if (HasUntried(*t)) {
        untried_.insert(t->abstractStateId);
      } else {
        untried_.erase(t->abstractStateId);
      }
    }

    InstructionSet fresh = r_.ledger.Record(result.executed);
    lastGain_ = CountInstructions(fresh);
    if (lastGain_ > 0) {
      if (!r_.actionsToFirstTargetCoverage) {
        r_.actionsToFirstTargetCoverage = r_.executedActions;
      }
      r_.utas.push_back({index, before, a, after, fresh, lastGain_});
    }

    StepLogEntry log;
    log.actionIndex = index;
    log.phase = phase;
    log.planned = planned != nullptr;
    log.sourceStateId = before.abstractStateId;
    log.observedStateId = after.abstractStateId;
    if (planned != nullptr) {
      log.abstractTransitionId = planned->abstractTransitionId;
      if (planned->abstractTransitionId) {
        if (const AbstractTransition* t =
                dstg().FindTransition(*planned->abstractTransitionId)) {
          log.guard = t->layoutGuard;
        }
      }
      if (const auto* e = std::get_if<StateId>(&planned->expected)) {
        log.expectedStateId = *e;
      }
    }
    r_.steps.push_back(std::move(log));
    return after.abstractStateId;
  }

  // --- Planning ------------------------------------------------------------

  std::vector<LayoutFingerprint> VisitedLayouts() const {
    const auto& trees = r_.model.gstg.guiTrees;
    const auto& actions = r_.model.gstg.actions;
    std::vector<LayoutFingerprint> out;
    size_t j = trees.size() - 1;
    for (;;) {
      const AbstractState* s = r_.model.dstg.FindState(trees[j].abstractStateId);
      if (s != nullptr) out.push_back(LayoutOf(*s));
      if (!IsOverlay(KindOf(trees[j].windowId)) || j == 0) break;
      if (actions[j - 1].action.actionType == ActionType::kResetApp) break;
      --j;
    }
    return out;
  }

  std::vector<StateId> ExtraOrigins() const {
    std::vector<StateId> out;
    const AbstractState& current = CurrentState();
    for (const auto& s : r_.model.dstg.abstractStates) {
      if (s.id == current.id || s.obsolete || s.windowId != current.windowId ||
          !inherited_.contains(s.id) || observed_.contains(s.id)) {
        continue;
      }
      if (IsBackwardEquivalent(current, s, addedOrReplaced_)) {
        out.push_back(s.id);
      }
    }
    return out;
  }

  std::optional<ActionSequence> Plan(const PlanTarget& target) const {
    return PlanToTarget(r_.model, CurrentStateId(), target, VisitedLayouts(),
                        config_.planner, ExtraOrigins());
  }

  void LogPlan(int phase, const ActionSequence& seq) {
    r_.plans.push_back(
        {phase, static_cast<size_t>(r_.executedActions), seq});
  }

  std::string PickText(const std::optional<WidgetId>& widget) {
    std::vector<std::string> pool;
    if (widget) {
      auto it = config_.textValues.find(*widget);
      if (it != config_.textValues.end()) pool = it->second;
    }
    pool.insert(pool.end(), config_.textDictionary.begin(),
                config_.textDictionary.end());
    if (pool.empty()) return "";
    return pool[rng_() % pool.size()];
  }

  bool Concretize(const PlannedStep& step, Action& a) {
    a.actionType = step.actionType;
    a.inputId = step.inputId;
    a.dataPayload = step.dataPayload;
    if (IsWindowLevel(step.actionType)) return true;
    const GuiTree& tree = CurrentTree();
    WidgetAssociation assoc =
        AssociateWidgets(tree.root, ewtg(), tree.windowId);
    std::vector<std::string> paths;
    if (step.sourceStateId && step.sourceAvmId) {
      const AbstractState* s = dstg().FindState(*step.sourceStateId);
      const Avm* avm = s == nullptr ? nullptr : s->FindAvm(*step.sourceAvmId);
      if (avm != nullptr) {
        for (const auto& n :
             AbstractNodes(tree.root, s->abstractionLevel, assoc)) {
          if (n.valuations == avm->valuations &&
              Capable(*n.node, step.actionType)) {
            paths.push_back(n.path);
          }
        }
      }
    }
    if (paths.empty() && step.widgetId) {
      for (const auto& [path, w] : assoc) {
        if (w != *step.widgetId) continue;
        const GuiNode* n = NodeAt(tree.root, path);
        if (n != nullptr && Capable(*n, step.actionType)) {
          paths.push_back(path);
        }
      }
    }
    if (paths.empty()) return false;
    a.concreteNodePath = paths[rng_() % paths.size()];
    if (a.actionType == ActionType::kTextFill && !a.dataPayload) {
      auto it = assoc.find(*a.concreteNodePath);
      a.dataPayload = PickText(it == assoc.end()
                                   ? std::nullopt
                                   : std::optional<WidgetId>(it->second));
    }
    return true;
  }

  Outcome Classify(const PlannedStep& step, const StateId& observed) const {
    if (const auto* m = std::get_if<MetaRef>(&step.expected)) {
      const AbstractState* o = r_.model.dstg.FindState(observed);
      return o != nullptr && o->windowId == m->windowId ? Outcome::kAsExpected
                                                        : Outcome::kMismatch;
    }
    const auto* e = std::get_if<StateId>(&step.expected);
    if (e == nullptr || *e == observed) return Outcome::kAsExpected;
    const AbstractState* exp = r_.model.dstg.FindState(*e);
    const AbstractState* obs = r_.model.dstg.FindState(observed);
    if (exp != nullptr && obs != nullptr && !observed_.contains(*e) &&
        IsBackwardEquivalent(*obs, *exp, addedOrReplaced_)) {
      return Outcome::kBackwardEquivalent;
    }
    return Outcome::kMismatch;
  }

  void RemoveTransition(const TransitionId& id) {
    std::erase_if(dstg().abstractTransitions,
                  [&](const AbstractTransition& t) { return t.id == id; });
  }

  void OnlineRefine(const PlannedStep& step, const StateId& expected,
                    size_t index) {
    if (!observed_.contains(expected)) {
      if (step.abstractTransitionId) RemoveTransition(*step.abstractTransitionId);
      return;
    }
    const auto& trees = gstg().guiTrees;
    const auto& actions = gstg().actions;
    const GuiTree& src = trees[index];
    const Action& act = actions[index].action;
    const Window* window = ewtg().FindWindow(src.windowId);
    for (size_t j = 0; j < index; ++j) {
      if (trees[j].abstractStateId != src.abstractStateId ||
          trees[j + 1].abstractStateId != expected ||
          actions[j].action.actionType != act.actionType ||
          actions[j].action.inputId != act.inputId) {
        continue;
      }
      auto level = RefineAbstraction(*window, trees[j], src,
                                     dstg().LevelOf(src.windowId));
      if (level) {
        RefineWindow(src.windowId, *level);
        return;
      }
    }
  }

  void RefineWindow(const WindowId& window, AbstractionLevel level) {
    dstg().abstractionPolicy[window] = level;
    auto& trees = gstg().guiTrees;
    std::set<StateId> old;
    for (const auto& t : trees) {
      if (t.windowId == window) old.insert(t.abstractStateId);
    }
    std::erase_if(dstg().abstractStates,
                  [&](const AbstractState& s) { return old.contains(s.id); });
    std::erase_if(dstg().abstractTransitions,
                  [&](const AbstractTransition& t) {
                    return old.contains(t.sourceStateId) ||
                           old.contains(t.destinationStateId);
                  });
    std::erase_if(dstg().initialStateIds,
                  [&](const StateId& s) { return old.contains(s); });
    for (size_t i = 0; i < trees.size(); ++i) {
      if (trees[i].windowId != window) continue;
      trees[i].abstractStateId = Intern(AbstractTree(r_.model, trees[i]));
      if (i == 0 ||
          gstg().actions[i - 1].action.actionType == ActionType::kResetApp) {
        dstg().initialStateIds.insert(trees[i].abstractStateId);
      }
    }
    for (size_t i = 0; i < gstg().actions.size(); ++i) {
      if (trees[i].windowId == window || trees[i + 1].windowId == window) {
        RecordTransition(i);
      }
    }
    observed_.clear();
    for (const auto& t : trees) observed_.insert(t.abstractStateId);
  }

  // Executes `seq` step by step; true when every step ran as expected.
  bool Follow(const ActionSequence& seq, int phase, int limit) {
    for (const PlannedStep& step : seq.steps) {
      if (!Left(limit)) return false;
      if (KindOf(CurrentTree().windowId) == WindowKind::kOutOfApp &&
          step.actionType != ActionType::kResetApp) {
        return false;
      }
      if (step.sourceStateId && *step.sourceStateId != CurrentStateId()) {
        const AbstractState* src = dstg().FindState(*step.sourceStateId);
        if (src == nullptr ||
            !IsBackwardEquivalent(CurrentState(), *src, addedOrReplaced_)) {
          return false;
        }
      }
      if (step.sourceMetaWindow &&
          *step.sourceMetaWindow != CurrentTree().windowId) {
        return false;
      }
      if (step.guarded && step.abstractTransitionId) {
        const AbstractTransition* t =
            dstg().FindTransition(*step.abstractTransitionId);
        if (t == nullptr ||
            (t->layoutGuard &&
             !GuardSatisfied(*t->layoutGuard, VisitedLayouts(),
                             config_.planner.layoutThreshold))) {
          return false;
        }
      }
      Action a;
      if (!Concretize(step, a)) return false;
      auto observed = Execute(a, phase, &step);
      if (!observed) return false;
      Outcome outcome = Classify(step, *observed);
      r_.steps.back().outcome = outcome;
      if (outcome == Outcome::kMismatch) {
        if (step.abstractTransitionId) ++failed_[*step.abstractTransitionId];
        if (const auto* e = std::get_if<StateId>(&step.expected)) {
          OnlineRefine(step, *e, r_.steps.back().actionIndex);
        }
        return false;
      }
    }
    return true;
  }

  // --- Exploration ---------------------------------------------------------

  bool EnsureInApp(int phase, int limit) {
    while (KindOf(CurrentTree().windowId) == WindowKind::kOutOfApp) {
      if (!Left(limit)) return false;
      Action reset;
      reset.actionType = ActionType::kResetApp;
      Execute(reset, phase, nullptr);
    }
    return true;
  }

  // Candidate actions on the current screen, and those of them never taken
  // from the current abstract state.
  std::pair<std::vector<Action>, std::vector<Action>> Options(
      const GuiTree& tree) const {
    std::vector<Action> options;
    ForEachNode(tree.root, [&](const std::string& path, const GuiNode& n,
                               const std::string&) {
      for (ActionType type : {ActionType::kClick, ActionType::kLongClick,
                              ActionType::kSwipe, ActionType::kTextFill}) {
        if (!Capable(n, type)) continue;
        Action a;
        a.actionType = type;
        a.concreteNodePath = path;
        options.push_back(std::move(a));
      }
    });
    for (const Input* in : r_.model.ewtg.InputsOf(tree.windowId)) {
      if (in->widgetId || in->actionType == ActionType::kResetApp ||
          in->actionType == ActionType::kIntent ||
          in->actionType == ActionType::kPressBack) {
        continue;
      }
      Action a;
      a.actionType = in->actionType;
      a.inputId = in->id;
      options.push_back(std::move(a));
    }
    Action back;
    back.actionType = ActionType::kPressBack;
    options.push_back(back);
    const AbstractState& cur = *r_.model.dstg.FindState(tree.abstractStateId);
    std::map<std::string, AvmId> avm_at;
    for (const auto& n : AbstractNodes(
             tree.root, cur.abstractionLevel,
             AssociateWidgets(tree.root, r_.model.ewtg, tree.windowId))) {
      for (const auto& m : cur.avms) {
        if (m.valuations == n.valuations) avm_at[n.path] = m.id;
      }
    }
    std::set<std::pair<std::string, ActionType>> taken;
    for (const auto& t : r_.model.dstg.abstractTransitions) {
      if (t.sourceStateId == cur.id) {
        taken.insert({t.sourceAvmId.value_or(""), t.actionType});
      }
    }
    std::vector<Action> fresh;
    for (const auto& o : options) {
      std::string key;
      if (o.concreteNodePath) {
        auto it = avm_at.find(*o.concreteNodePath);
        if (it == avm_at.end()) continue;
        key = it->second;
      }
      if (!taken.contains({key, o.actionType})) fresh.push_back(o);
    }
    return {std::move(options), std::move(fresh)};
  }

  bool HasUntried(const GuiTree& tree) const {
    if (KindOf(tree.windowId) == WindowKind::kOutOfApp ||
        r_.model.dstg.FindState(tree.abstractStateId) == nullptr) {
      return false;
    }
    return !Options(tree).second.empty();
  }

  // One seeded random action; false when the driver rejected it.
  bool RandomStep(int phase) {
    auto [options, fresh] = Options(CurrentTree());
    const std::vector<Action>& pool = fresh.empty() ? options : fresh;
    Action a = pool[rng_() % pool.size()];
    const GuiTree& tree = CurrentTree();
    if (a.actionType == ActionType::kTextFill) {
      WidgetAssociation assoc =
          AssociateWidgets(tree.root, ewtg(), tree.windowId);
      auto it = assoc.find(*a.concreteNodePath);
      a.dataPayload = PickText(it == assoc.end()
                                   ? std::nullopt
                                   : std::optional<WidgetId>(it->second));
    }
    return Execute(a, phase, nullptr).has_value();
  }

  void RandomExplore(int n, int phase, int limit) {
    for (int k = 0; k < n && Left(limit); ++k) {
      if (!EnsureInApp(phase, limit) || !Left(limit)) return;
      RandomStep(phase);
    }
  }

  // Random exploration that, whenever the current state offers no untried
  // action, first moves to the cheapest state known to offer one.
  void Explore(int n, int phase, int limit) {
    for (int k = 0; k < n && Left(limit); ++k) {
      if (!EnsureInApp(phase, limit) || !Left(limit)) return;
      if (!HasUntried(CurrentTree())) {
        untried_.erase(CurrentStateId());
        std::optional<ActionSequence> best;
        for (const auto& id : untried_) {
          const AbstractState* st = dstg().FindState(id);
          if (st == nullptr || st->obsolete) continue;
          auto plan = Plan(StateTarget{id});
          if (plan && (!best || plan->cost < best->cost)) {
            best = std::move(plan);
          }
        }
        if (best) {
          LogPlan(phase, *best);
          const int before = r_.executedActions;
          Follow(*best, phase, limit);
          if (r_.executedActions > before) {
            k += r_.executedActions - before - 1;
            continue;
          }
        }
      }
      RandomStep(phase);
    }
  }

  // --- Phases --------------------------------------------------------------

  std::vector<const Input*> TargetInputs() const {
    std::vector<const Input*> out;
    for (const auto& in : r_.model.ewtg.inputs) {
      if (in.actionType == ActionType::kResetApp ||
          in.actionType == ActionType::kIntent) {
        continue;
      }
      for (const auto& m : in.handlerMethodIds) {
        if (r_.ledger.targets().methodIds.contains(m)) {
          out.push_back(&in);
          break;
        }
      }
    }
    return out;
  }

  bool FullyCovered(const Input& in) const {
    const auto& targets = r_.ledger.targets();
    for (const auto& m : in.handlerMethodIds) {
      if (!targets.methodIds.contains(m)) continue;
      auto count = targets.instructionCounts.find(m);
      auto covered = r_.ledger.covered().find(m);
      int have = covered == r_.ledger.covered().end()
                     ? 0
                     : static_cast<int>(covered->second.size());
      if (count == targets.instructionCounts.end() || have < count->second) {
        return false;
      }
    }
    return true;
  }

  void Phase1(int limit) {
    std::map<InputId, int> failures;
    int idle = 0;
    while (Left(limit) && idle < kMaxIdleRounds) {
      const int before = r_.executedActions;
      if (!EnsureInApp(1, limit) || !Left(limit)) return;
      std::optional<ActionSequence> best;
      InputId goal;
      for (const Input* in : TargetInputs()) {
        if (triggered_.contains(in->id) ||
            failures[in->id] >= config_.repetitionCap) {
          continue;
        }
        if (goal.empty()) goal = in->id;  // something is pending
        auto plan = Plan(InputTarget{in->id});
        if (plan && (!best || plan->cost < best->cost)) {
          best = std::move(plan);
          goal = in->id;
        }
      }
      if (goal.empty()) return;
      if (!best) {
        Explore(config_.randomSlice, 1, limit);
        idle = r_.executedActions == before ? idle + 1 : 0;
        continue;
      }
      LogPlan(1, *best);
      bool ok = Follow(*best, 1, limit);
      if (!ok || !triggered_.contains(goal)) ++failures[goal];
      idle = r_.executedActions == before ? idle + 1 : 0;
    }
  }

  // Re-triggers target inputs whose methods are not fully covered.
  void Phase2(int limit, int phase) {
    std::map<InputId, int> noGain;
    std::map<InputId, int> failures;
    size_t cursor = 0;
    while (Left(limit)) {
      if (!EnsureInApp(phase, limit) || !Left(limit)) return;
      std::vector<const Input*> goals;
      for (const Input* in : TargetInputs()) {
        if (!FullyCovered(*in) && noGain[in->id] < config_.repetitionCap &&
            failures[in->id] < config_.repetitionCap) {
          goals.push_back(in);
        }
      }
      if (goals.empty()) return;
      std::optional<ActionSequence> plan;
      // Following a plan may add inputs and move the EWTG's storage.
      InputId goal;
      for (size_t k = 0; k < goals.size() && !plan; ++k) {
        goal = goals[(cursor + k) % goals.size()]->id;
        plan = Plan(InputTarget{goal});
      }
      ++cursor;
      if (!plan) {
        std::vector<InputId> pending;
        for (const Input* g : goals) pending.push_back(g->id);
        Explore(config_.randomSlice, phase, limit);
        for (const auto& g : pending) ++failures[g];
        continue;
      }
      LogPlan(phase, *plan);
      if (Follow(*plan, phase, limit)) {
        noGain[goal] = lastGain_ > 0 ? 0 : noGain[goal] + 1;
      } else {
        ++failures[goal];
      }
    }
  }

  void Phase3(int limit) {
    if (config_.relatedWindows.empty()) {
      Phase2(limit, 3);
      return;
    }
    std::map<std::pair<WindowId, WindowId>, int> attempts;
    while (Left(limit)) {
      if (!EnsureInApp(3, limit) || !Left(limit)) return;
      std::optional<std::pair<WindowId, WindowId>> goal;
      std::vector<InputId> inputs;
      for (const auto& pair : config_.relatedWindows) {
        if (attempts[pair] >= config_.repetitionCap) continue;
        inputs.clear();
        for (const Input* in : TargetInputs()) {
          if (in->windowId == pair.second && !FullyCovered(*in)) {
            inputs.push_back(in->id);
          }
        }
        if (!inputs.empty()) {
          goal = pair;
          break;
        }
      }
      if (!goal) return;
      ++attempts[*goal];
      if (CurrentTree().windowId != goal->first) {
        auto plan = Plan(WindowTarget{goal->first});
        if (!plan) {
          Explore(config_.randomSlice, 3, limit);
          continue;
        }
        LogPlan(3, *plan);
        if (!Follow(*plan, 3, limit)) continue;
      }
      for (const auto& in : inputs) {
        auto plan = Plan(InputTarget{in});
        if (!plan) continue;
        LogPlan(3, *plan);
        Follow(*plan, 3, limit);
        break;
      }
    }
  }

  void Finish() {
    SessionObservations obs;
    for (const auto& t : gstg().guiTrees) ++obs.observations[t.abstractStateId];
    for (const auto& [id, n] : obs.observations) {
      if (!inherited_.contains(id)) obs.created.insert(id);
    }
    obs.failedTraversals = failed_;
    obs.windowsWithFlags = flaggedWindows_;
    PropagateObsolescence(r_.model, obs);
  }

  SessionResult r_;
  Driver& driver_;
  EngineConfig config_;
  std::mt19937_64 rng_;
  IdAllocator stateIds_{"s"};
  IdAllocator avmIds_{"avm"};
  IdAllocator atIds_{"at"};
  IdAllocator treeIds_{"g"};
  IdAllocator rtWidgets_{"rt:w"};
  IdAllocator rtInputs_{"rt:i"};
  IdAllocator rtTransitions_{"rt:t"};
  std::set<StateId> inherited_;
  std::set<StateId> observed_;
  std::set<InputId> triggered_;
  // States whose last visit showed actions never taken from them.
  std::set<StateId> untried_;
  std::map<TransitionId, int> failed_;
  std::set<WindowId> flaggedWindows_;
  std::set<WidgetId> addedOrReplaced_;
  int lastGain_ = 0;
};

}  // namespace

SessionResult RunSession(AppModel model, const TargetSet& targets,
                         Driver& driver, const EngineConfig& config) {
  return Session(std::move(model), targets, driver, config).Run();
}

}  // namespace carryover
