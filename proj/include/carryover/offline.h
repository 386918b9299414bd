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

// Post-session refinement: pruning, replay and obsolescence.

#ifndef CARRYOVER_OFFLINE_H_
#define CARRYOVER_OFFLINE_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "carryover/driver.h"
#include "carryover/model.h"

namespace carryover {

// Removes, for every window that appears in the GSTG, the states of that
// window no GSTG tree maps to, together with their transitions.
AppModel PruneUnvisited(const AppModel& model);

struct ReplayResult {
  AppModel model;
  std::set<StateId> flagged;
  std::vector<std::string> warnings;
};

// Replays the GSTG trace from a reset and flags every expected state that
// is not re-reached. `driver` must run the model's app version.
ReplayResult ReplayFlagObsolete(const AppModel& model, Driver& driver);

struct SessionObservations {
  // Times each state was observed in the session.
  std::map<StateId, int> observations;
  std::set<StateId> created;
  // Planned traversals of abstract transitions that did not reach their
  // destination.
  std::map<TransitionId, int> failedTraversals;
  // Windows holding a state flagged by replay when the session started.
  std::set<WindowId> windowsWithFlags;
};

// Flags states created in the session, in windows listed in
// `windowsWithFlags`, that were never re-reached while every incoming
// transition failed a re-traversal. Returns the flagged ids.
std::set<StateId> PropagateObsolescence(AppModel& model,
                                        const SessionObservations& session);

}  // namespace carryover

#endif  // CARRYOVER_OFFLINE_H_
