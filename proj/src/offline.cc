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

#include "carryover/offline.h"

#include <algorithm>

#include "carryover/abstraction.h"

namespace carryover {

AppModel PruneUnvisited(const AppModel& model) {
  AppModel out = model;
  std::set<WindowId> visited;
  std::set<StateId> seen;
  for (const auto& t : model.gstg.guiTrees) {
    visited.insert(t.windowId);
    seen.insert(t.abstractStateId);
  }
  std::set<StateId> gone;
  for (const auto& s : model.dstg.abstractStates) {
    if (visited.contains(s.windowId) && !seen.contains(s.id)) gone.insert(s.id);
  }
  if (gone.empty()) return out;
  std::erase_if(out.dstg.abstractStates,
                [&](const AbstractState& s) { return gone.contains(s.id); });
  std::erase_if(out.dstg.abstractTransitions,
                [&](const AbstractTransition& t) {
                  return gone.contains(t.sourceStateId) ||
                         gone.contains(t.destinationStateId);
                });
  std::erase_if(out.dstg.initialStateIds,
                [&](const StateId& s) { return gone.contains(s); });
  return out;
}

ReplayResult ReplayFlagObsolete(const AppModel& model, Driver& driver) {
  ReplayResult r{model, {}, {}};
  const auto& trees = model.gstg.guiTrees;
  const auto& actions = model.gstg.actions;
  if (trees.empty()) return r;

  auto flag = [&](size_t k) {
    AbstractState* s = r.model.dstg.FindState(trees[k].abstractStateId);
    if (s == nullptr) return;
    s->obsolete = true;
    r.flagged.insert(s->id);
  };
  auto check = [&](size_t k, const Observation& o) {
    const AbstractState* expected =
        model.dstg.FindState(trees[k].abstractStateId);
    if (expected == nullptr) return;
    if (o.tree.windowId != expected->windowId) {
      flag(k);
      return;
    }
    AbstractState got = DeriveAbstractState(
        o.tree, expected->abstractionLevel,
        AssociateWidgets(o.tree.root, model.ewtg, o.tree.windowId));
    if (!StatesEqual(got, *expected)) flag(k);
  };

  try {
    check(0, driver.Reset().observation);
    bool skipping = false;
    for (size_t i = 0; i < actions.size(); ++i) {
      const Action& a = actions[i].action;
      const bool reset = a.actionType == ActionType::kResetApp;
      if (skipping && !reset) continue;
      skipping = false;
      StepResult result;
      try {
        result = reset ? driver.Reset() : driver.Perform(a);
      } catch (const DriverRejection& e) {
        flag(i + 1);
        skipping = true;
        continue;
      }
      check(i + 1, result.observation);
    }
  } catch (const DriverError& e) {
    r.warnings.push_back(std::string("replay stopped: ") + e.what());
  }
  return r;
}

std::set<StateId> PropagateObsolescence(AppModel& model,
                                        const SessionObservations& session) {
  std::set<StateId> flagged;
  for (const auto& id : session.created) {
    AbstractState* s = model.dstg.FindState(id);
    if (s == nullptr || s->obsolete) continue;
    if (!session.windowsWithFlags.contains(s->windowId)) continue;
    if (model.dstg.initialStateIds.contains(id)) continue;
    auto seen = session.observations.find(id);
    if (seen != session.observations.end() && seen->second > 1) continue;
    bool any = false;
    bool all_failed = true;
    for (const auto& t : model.dstg.abstractTransitions) {
      if (t.destinationStateId != id) continue;
      any = true;
      auto f = session.failedTraversals.find(t.id);
      if (f == session.failedTraversals.end() || f->second == 0) {
        all_failed = false;
      }
    }
    if (any && all_failed) {
      s->obsolete = true;
      flagged.insert(id);
    }
  }
  return flagged;
}

}  // namespace carryover
