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

// Carrying a learned model over to the next app version.

#ifndef CARRYOVER_ADAPTATION_H_
#define CARRYOVER_ADAPTATION_H_

#include <map>
#include <stdexcept>
#include <string>

#include "carryover/diff.h"
#include "carryover/model.h"

namespace carryover {

class AdaptationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base id to updated id, per element kind, for every base element that
// survives into the updated version.
struct ElementMaps {
  std::map<WindowId, WindowId> windows;
  std::map<WidgetId, WidgetId> widgets;
  std::map<TransitionId, TransitionId> transitions;
  std::map<InputId, InputId> inputs;
};

// Maps derived from the diff alone. Replaced window transitions are left
// out so that their abstract transitions are dropped.
ElementMaps MapsFromDiff(const DiffResult& diff, const Ewtg& base,
                         const Ewtg& updated);

// Copies the base version's runtime-created elements into `updated`,
// reusing an updated element when one with the same identity exists, and
// extends `maps` accordingly.
void CarryRuntimeElements(const Ewtg& base, Ewtg& updated, ElementMaps& maps);

Dstg UpdateDstg(const Dstg& dstg, const DiffResult& diff,
                const ElementMaps& maps, const Ewtg& updated);
Dstg UpdateDstg(const Dstg& dstg, const DiffResult& diff, const Ewtg& base,
                const Ewtg& updated);

// Copies the base model, empties the GSTG, installs the updated EWTG (plus
// carried runtime elements) and updates the DSTG. Throws AdaptationError
// when the diff names elements absent from either EWTG.
AppModel AdaptModel(const AppModel& base, const Ewtg& updatedEwtg,
                    const DiffResult& diff, const VersionTag& updatedVersion);

}  // namespace carryover

#endif  // CARRYOVER_ADAPTATION_H_
