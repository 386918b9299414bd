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

// Action-sequence planning over the DSTG extended, for one planning
// episode, with MetaStates and MetaTransitions.
//
// A sequence of n actions with availability probabilities p_1..p_n costs
//
//   cost = full + full / 2 * (1 - p_1 * ... * p_n),  full = sum of costs,
//
// where p_j is 1 when action j departs from an AbstractState and the
// presence ratio of its widget when it departs from a MetaState.

#ifndef CARRYOVER_PLANNER_H_
#define CARRYOVER_PLANNER_H_

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "carryover/abstraction.h"
#include "carryover/model.h"

namespace carryover {

struct PlannerConfig {
  double layoutThreshold = kDefaultLayoutThreshold;
  // Availability assumed for actions departing from a MetaState of a
  // window that has no AbstractState yet.
  double defaultProbability = 0.5;
  // Upper bound on cost_full explored by the search.
  double maxFullCost = 40;
};

struct MetaState {
  WindowId windowId;
  std::map<WidgetId, double> widgetPresence;
  std::optional<InputId> sourceInputId;
};

// One MetaState per destination window of `input`, known either from
// abstract transitions exercising it or from the EWTG.
std::vector<MetaState> BuildMetaStates(const AppModel& model,
                                       const InputId& input);
// Presence ratios over the non-obsolete states of `windowId`; empty when
// the window has none.
MetaState MetaStateOf(const AppModel& model, const WindowId& windowId);

// The input an abstract transition exercises: its own link when present,
// otherwise resolved from the source AVM's widget and the action type.
std::optional<InputId> InputOf(const AppModel& model,
                               const AbstractTransition& transition);

struct MetaRef {
  WindowId windowId;
  bool operator==(const MetaRef&) const = default;
};

using Expected = std::variant<std::monostate, StateId, MetaRef>;

struct PlannedStep {
  ActionType actionType = ActionType::kClick;
  std::optional<InputId> inputId;
  std::optional<WidgetId> widgetId;
  std::optional<std::string> dataPayload;
  // Where the action departs from: an AbstractState (with the AVM acted on)
  // or the MetaState of a window.
  std::optional<StateId> sourceStateId;
  std::optional<AvmId> sourceAvmId;
  std::optional<WindowId> sourceMetaWindow;
  Expected expected;
  double probability = 1.0;
  std::optional<TransitionId> abstractTransitionId;
  bool guarded = false;
};

struct ActionSequence {
  std::vector<PlannedStep> steps;
  bool probabilistic = false;
  double costFull = 0;
  double costPartial = 0;
  double likelihoodPartial = 0;
  double cost = 0;
  // The state the sequence was planned from.
  StateId origin;
};

struct SequenceCostBreakdown {
  double costFull = 0;
  double costPartial = 0;
  double likelihoodPartial = 0;
  double cost = 0;
};

SequenceCostBreakdown SequenceCost(const std::vector<PlannedStep>& steps);
SequenceCostBreakdown SequenceCost(const std::vector<ActionType>& actions,
                                   const std::vector<double>& probabilities);

struct WindowTarget {
  WindowId id;
};
struct StateTarget {
  StateId id;
};
struct InputTarget {
  InputId id;
};
using PlanTarget = std::variant<WindowTarget, StateTarget, InputTarget>;

// Returns a minimum-cost sequence from `current` (or from any of
// `extraOrigins`) to `target`, or nullopt when none exists. For an input
// target the last step triggers the input. Layout-guarded transitions are
// traversed only when their guard is similar to one of `visitedLayouts`.
// The model is not modified.
std::optional<ActionSequence> PlanToTarget(
    const AppModel& model, const StateId& current, const PlanTarget& target,
    const std::vector<LayoutFingerprint>& visitedLayouts,
    const PlannerConfig& config = {},
    const std::vector<StateId>& extraOrigins = {});

bool GuardSatisfied(const LayoutFingerprint& guard,
                    const std::vector<LayoutFingerprint>& visitedLayouts,
                    double threshold);

std::string Describe(const ActionSequence& sequence);

}  // namespace carryover

#endif  // CARRYOVER_PLANNER_H_
