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

// What the test engine needs from an app under test.

#ifndef CARRYOVER_DRIVER_H_
#define CARRYOVER_DRIVER_H_

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "carryover/model.h"

namespace carryover {

// Instructions executed by one action, per method (1-based indices).
using InstructionSet = std::map<MethodId, std::set<int>>;

struct Observation {
  // windowId and root are filled; the engine assigns the rest.
  GuiTree tree;
  WindowKind kind = WindowKind::kActivity;
  std::string windowName;
  std::string className;
};

struct StepResult {
  Observation observation;
  InstructionSet executed;
};

// The action cannot be performed on the current screen.
class DriverRejection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The app or its driver failed; the session cannot continue.
class DriverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Driver {
 public:
  virtual ~Driver() = default;
  // Restarts the app and returns its first screen.
  virtual StepResult Reset() = 0;
  virtual Observation Current() const = 0;
  // Deterministic given the app state and the action.
  virtual StepResult Perform(const Action& action) = 0;
};

}  // namespace carryover

#endif  // CARRYOVER_DRIVER_H_
