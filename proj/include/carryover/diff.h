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

// EWTG differencing. Both EWTGs are converted into element trees (windows
// at the top, their widgets and outgoing transitions below) and matched in
// three passes:
//
//   1. bottom-up, every base element collects the updated elements of the
//      same kind whose attributes are similar;
//   2. top-down, candidates are assigned one to one, greedily by similarity
//      score with document order breaking ties, provided the referenced
//      containers and parents are already paired;
//   3. bottom-up, pairs are classified as unchanged or changed.
//
// Elements left unpaired are then related by the looser correspondence
// rules and the rest become added or deleted.

#ifndef CARRYOVER_DIFF_H_
#define CARRYOVER_DIFF_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "carryover/model.h"

namespace carryover {

inline constexpr std::string_view kWindowElement = "Window";
inline constexpr std::string_view kWidgetElement = "Widget";
inline constexpr std::string_view kTransitionElement = "Transition";

struct DiffConfig {
  double levenshteinThreshold = 0.4;
  double xpathThreshold = 0.4;
};

struct MElement {
  std::string id;
  std::string kind;
  std::map<std::string, std::string> attributes;
  std::map<std::string, std::string> references;
  std::vector<size_t> subElements;
};

struct RcvModel {
  // Document order: each window followed by its widgets, then its
  // transitions.
  std::vector<MElement> elements;
  std::vector<size_t> roots;

  const MElement* Find(std::string_view kind, std::string_view id) const;
  std::vector<const MElement*> OfKind(std::string_view kind) const;
};

RcvModel EwtgToRcv(const Ewtg& ewtg);

double LevenshteinRatio(std::string_view a, std::string_view b);
double XpathSimilarity(std::string_view a, std::string_view b);
// Text after the last '.'.
std::string_view SimpleClassName(std::string_view className);

// Similarity of one attribute, in [0, 1].
double AttributeSimilarity(std::string_view name, std::string_view a,
                           std::string_view b);
bool AttributeSimilar(std::string_view name, std::string_view a,
                      std::string_view b, const DiffConfig& config);

struct Matching {
  // kind -> base id -> updated id.
  std::map<std::string, std::map<std::string, std::string>> pairs;
  // kind -> base ids whose pair differs in some attribute or reference.
  std::map<std::string, std::set<std::string>> changed;
  // kind -> base id -> candidate updated ids from the first pass.
  std::map<std::string, std::map<std::string, std::vector<std::string>>>
      candidates;
};

Matching MatchModels(const RcvModel& base, const RcvModel& updated,
                     const DiffConfig& config = {});

struct ElementDiff {
  std::vector<std::string> added;    // updated ids
  std::vector<std::string> deleted;  // base ids
  std::map<std::string, std::string> replaced;
  std::map<std::string, std::string> matched;

  bool operator==(const ElementDiff&) const = default;
};

struct DiffResult {
  ElementDiff windows;
  ElementDiff widgets;
  ElementDiff transitions;
  // Decisions taken when a correspondence was ambiguous.
  std::vector<std::string> log;

  // Updated-version widgets that are added or replace a base widget.
  std::set<WidgetId> AddedOrReplacedUpdatedWidgets() const;
  // Base id to updated id for unchanged and replaced elements.
  std::map<std::string, std::string> Pairing(std::string_view kind) const;
  bool Empty() const;

  bool operator==(const DiffResult& o) const {
    return windows == o.windows && widgets == o.widgets &&
           transitions == o.transitions;
  }
};

DiffResult ClassifyCorrespondence(const Matching& matching, const Ewtg& base,
                                  const Ewtg& updated,
                                  const DiffConfig& config = {});

DiffResult DiffEwtgs(const Ewtg& base, const Ewtg& updated,
                     const DiffConfig& config = {});

nlohmann::json ToJson(const DiffResult& diff);
DiffResult DiffFromJson(const nlohmann::json& doc);

}  // namespace carryover

#endif  // CARRYOVER_DIFF_H_
