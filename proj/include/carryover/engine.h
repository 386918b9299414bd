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

// The test session: three phases of planned testing against a driver,
// followed by random exploration until the action budget is spent.
//
//   Phase 1  trigger every target input once;
//   Phase 2  re-trigger target inputs whose methods are not fully covered,
//            from states where they were not exercised yet;
//   Phase 3  trigger target inputs of a window right after visiting a
//            related window (Phase 2 again when no relation is declared).

#ifndef CARRYOVER_ENGINE_H_
#define CARRYOVER_ENGINE_H_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "carryover/abstraction.h"
#include "carryover/driver.h"
#include "carryover/model.h"
#include "carryover/planner.h"

namespace carryover {

struct TargetSet {
  std::set<MethodId> methodIds;
  // Instruction count of every target method.
  std::map<MethodId, int> instructionCounts;

  int TotalInstructions() const;
};

class CoverageLedger {
 public:
  CoverageLedger() = default;
  explicit CoverageLedger(TargetSet targets) : targets_(std::move(targets)) {}

  // Folds in the instructions one executed action ran and returns the
  // target instructions it covered for the first time.
  InstructionSet Record(const InstructionSet& executed);

  const TargetSet& targets() const { return targets_; }
  const std::map<MethodId, std::set<int>>& covered() const { return covered_; }
  // Raw instructions executed by each action, indexed by action position.
  const std::vector<InstructionSet>& executed() const { return executed_; }
  const std::vector<InstructionSet>& newlyCovered() const { return newly_; }

  int CoveredInstructions() const;
  int CoveredMethods() const;
  // Percentages in [0, 100]; 0 when there are no targets.
  double MethodCoverage() const;
  double InstructionCoverage() const;

 private:
  TargetSet targets_;
  std::map<MethodId, std::set<int>> covered_;
  std::vector<InstructionSet> executed_;
  std::vector<InstructionSet> newly_;
};

int CountInstructions(const InstructionSet& set);

struct UtaRecord {
  size_t actionIndex = 0;
  GuiTree beforeTree;
  Action action;
  GuiTree afterTree;
  InstructionSet newlyCovered;
  int newlyCoveredInstructionCount = 0;
};

struct EngineConfig {
  int budget = 200;
  unsigned long long seed = 0;
  std::array<double, 3> phaseCaps = {0.5, 0.3, 0.2};
  // Re-triggers of one input without coverage gain before it is dropped.
  int repetitionCap = 3;
  // Random actions taken when no goal can be planned.
  int randomSlice = 5;
  PlannerConfig planner;
  std::vector<std::pair<WindowId, WindowId>> relatedWindows;
  std::map<WidgetId, std::vector<std::string>> textValues;
  std::vector<std::string> textDictionary = {"Running", "hello", "42",
                                             "user@example.com", ""};
  // Nodes whose bounds hint is smaller than this on either side are left
  // alone.
  int minWidgetSide = 4;
};

enum class Outcome { kAsExpected, kBackwardEquivalent, kMismatch };

std::string_view ToString(Outcome outcome);

struct PlanLogEntry {
  int phase = 0;
  size_t atAction = 0;
  ActionSequence sequence;
};

struct StepLogEntry {
  size_t actionIndex = 0;
  int phase = 0;
  bool planned = false;
  StateId sourceStateId;
  StateId observedStateId;
  std::optional<TransitionId> abstractTransitionId;
  std::optional<LayoutFingerprint> guard;
  // Expected destination when the step followed an abstract transition.
  std::optional<StateId> expectedStateId;
  Outcome outcome = Outcome::kAsExpected;
};

struct SessionResult {
  AppModel model;
  CoverageLedger ledger;
  std::vector<UtaRecord> utas;
  std::vector<PlanLogEntry> plans;
  std::vector<StepLogEntry> steps;
  int executedActions = 0;
  // Number of executed actions up to and including the first one that
  // covered a target instruction.
  std::optional<int> actionsToFirstTargetCoverage;
  // Phase of each executed action (4 for the final random exploration).
  std::vector<int> actionPhases;
  bool aborted = false;
  std::string abortReason;
};

// The abstract state `tree` maps to under the model's current policy; the
// returned state has local AVM ids and no id.
AbstractState AbstractTree(const AppModel& model, const GuiTree& tree);

// Runs one session. The GSTG of `model` is replaced by this session's
// trace; a driver error ends the session with `aborted` set.
SessionResult RunSession(AppModel model, const TargetSet& targets,
                         Driver& driver, const EngineConfig& config);

}  // namespace carryover

#endif  // CARRYOVER_ENGINE_H_
