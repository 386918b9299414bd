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

// Helpers shared by the unit tests and the acceptance runner.

#ifndef CARRYOVER_TESTS_SUPPORT_H_
#define CARRYOVER_TESTS_SUPPORT_H_

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "carryover/model.h"
#include "carryover/planner.h"

namespace carryover::testing {

std::filesystem::path FixturePath(const std::string& name);

// A fresh, empty directory under the system temp dir.
std::filesystem::path ScratchDir(const std::string& tag);

// L1 valuations of an ordinary widget.
Valuations L1Valuation(const std::string& resourceId,
                       const std::string& className = "android.widget.Button",
                       bool clickable = true, bool enabled = true);

// Random planning model: up to `maxStates` states over a few windows, one
// initial state, some obsolete and disabled elements, a few guarded
// transitions. Targets reachable through AbstractTransitions, EWTG window
// transitions and MetaTransitions alike.
AppModel RandomPlanningModel(std::mt19937_64& rng, int maxStates);

struct OracleResult {
  double cost = 0;
  size_t length = 0;
};

// Minimum sequence cost to `target` over every action sequence of at most
// `maxLength` steps, found by plain enumeration.
std::optional<OracleResult> ExhaustiveMinimum(
    const AppModel& model, const StateId& current, const PlanTarget& target,
    const std::vector<LayoutFingerprint>& visitedLayouts, size_t maxLength,
    double layoutThreshold = 0.8, double defaultProbability = 0.5);

}  // namespace carryover::testing

#endif  // CARRYOVER_TESTS_SUPPORT_H_
