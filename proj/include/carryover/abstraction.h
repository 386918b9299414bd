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

// State abstraction: reducers, abstraction levels, AVM derivation, layout
// fingerprints, refinement and backward equivalence.

#ifndef CARRYOVER_ABSTRACTION_H_
#define CARRYOVER_ABSTRACTION_H_

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "carryover/model.h"

namespace carryover {

struct DiffResult;

inline constexpr double kDefaultLayoutThreshold = 0.8;

// Valuation key holding the canonical encoding of a node's children at L4/L5.
inline constexpr std::string_view kChildrenKey = "R_Children";

struct Reducer {
  std::string_view name;
  Valuation (*extract)(const GuiNode&);
};

const std::vector<Reducer>& AllReducers();
const Reducer& ReducerNamed(std::string_view name);

// Reducers applied to the node itself.
std::vector<Reducer> OwnReducers(AbstractionLevel level);
// Level whose reducers are applied to each child; absent for L1 to L3.
std::optional<AbstractionLevel> ChildLevel(AbstractionLevel level);

Valuations Valuate(const GuiNode& node, AbstractionLevel level);
// Drops every key that is not an L1 reducer.
Valuations ProjectL1(const Valuations& valuations);

// Nodes that yield AVMs: interactable ones, plus leaves carrying a resource
// id, text or content description.
bool IsAbstracted(const GuiNode& node);

// Node path to EWTG widget id, for nodes that have a static counterpart.
using WidgetAssociation = std::map<std::string, WidgetId>;

// Pairs abstracted nodes with widgets of `windowId` by xpath and resource
// id, falling back to resource id and class name.
WidgetAssociation AssociateWidgets(const GuiNode& root, const Ewtg& ewtg,
                                   std::string_view windowId);

struct AbstractNode {
  std::string path;
  Valuations valuations;
  std::optional<WidgetId> widgetId;
  const GuiNode* node = nullptr;
};

std::vector<AbstractNode> AbstractNodes(const GuiNode& root,
                                        AbstractionLevel level,
                                        const WidgetAssociation& association);

// One AVM per distinct valuation vector, in valuation order; AVM ids are
// local ("a1", "a2", ...) and the caller renames them when storing.
AbstractState DeriveAbstractState(const GuiTree& tree, AbstractionLevel level,
                                  const WidgetAssociation& association);

class AbstractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Multiset equality of (valuations, cardinality); throws AbstractionError
// when the states have different windows or levels.
bool StatesEqual(const AbstractState& a, const AbstractState& b);

LayoutFingerprint LayoutOf(const AbstractState& state);
// Multiset Jaccard index; 1.0 for two empty fingerprints.
double LayoutSimilarity(const LayoutFingerprint& a, const LayoutFingerprint& b);
double LayoutSimilarity(const AbstractState& a, const AbstractState& b);

// The lowest level above `current` at which the two trees abstract to
// different states; nullopt when they are equal up to L5.
std::optional<AbstractionLevel> RefineAbstraction(const Window& window,
                                                  const GuiTree& a,
                                                  const GuiTree& b,
                                                  AbstractionLevel current);

bool IsBackwardEquivalent(const AbstractState& observed,
                          const AbstractState& expected,
                          const std::set<WidgetId>& addedOrReplaced);
bool IsBackwardEquivalent(const AbstractState& observed,
                          const AbstractState& expected,
                          const DiffResult& diff);

// Walks the GSTG backward from `fromTree` (inclusive) over trees of the
// destination's window, stopping after the tree reached by the latest reset
// or the first tree, and returns the layout of the first state whose
// similarity with `destination` meets `threshold`.
std::optional<LayoutFingerprint> MakeLayoutGuard(
    const AbstractState& destination, const Gstg& gstg, const Dstg& dstg,
    size_t fromTree, double threshold = kDefaultLayoutThreshold);

}  // namespace carryover

#endif  // CARRYOVER_ABSTRACTION_H_
