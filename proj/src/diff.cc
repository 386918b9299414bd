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

#include "carryover/diff.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "carryover/model_io.h"

namespace carryover {
namespace {

using Pairs = std::map<std::string, std::string>;

const std::string kWin(kWindowElement);
const std::string kWid(kWidgetElement);
const std::string kTr(kTransitionElement);

std::string RefKind(std::string_view ref) {
  return (ref == "parent" || ref == "widget") ? kWid : kWin;
}

bool RefPaired(const std::map<std::string, Pairs>& pairs,
               const MElement& b, const MElement& u, const std::string& ref) {
  auto ib = b.references.find(ref);
  auto iu = u.references.find(ref);
  bool hb = ib != b.references.end();
  bool hu = iu != u.references.end();
  if (!hb || !hu) return hb == hu;
  auto kind = pairs.find(RefKind(ref));
  if (kind == pairs.end()) return false;
  auto it = kind->second.find(ib->second);
  return it != kind->second.end() && it->second == iu->second;
}

double Score(const MElement& b, const MElement& u) {
  if (b.attributes.empty()) return 1.0;
  double total = 0;
  for (const auto& [name, value] : b.attributes) {
    auto it = u.attributes.find(name);
    total += it == u.attributes.end()
                 ? 0.0
                 : AttributeSimilarity(name, value, it->second);
  }
  return total / static_cast<double>(b.attributes.size());
}

bool AttributesSimilar(const MElement& b, const MElement& u,
                       const DiffConfig& config,
                       std::string_view except = "") {
  for (const auto& [name, value] : b.attributes) {
    if (name == except) continue;
    auto it = u.attributes.find(name);
    if (it == u.attributes.end() ||
        !AttributeSimilar(name, value, it->second, config)) {
      return false;
    }
  }
  return true;
}

struct Candidate {
  double score;
  size_t bi;
  size_t ui;
};

void SortCandidates(std::vector<Candidate>& c) {
  std::stable_sort(c.begin(), c.end(), [](const Candidate& x,
                                          const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.bi != y.bi) return x.bi < y.bi;
    return x.ui < y.ui;
  });
}

class Matcher {
 public:
  Matcher(const RcvModel& base, const RcvModel& updated,
          const DiffConfig& config)
      : base_(base), updated_(updated), config_(config) {
    for (const auto& k : {kWin, kWid, kTr}) {
      pairs_[k];
      reverse_[k];
    }
  }

  // Pass 1.
  void CollectCandidates(Matching& out) {
    for (size_t bi = 0; bi < base_.elements.size(); ++bi) {
      const MElement& b = base_.elements[bi];
      auto& list = out.candidates[b.kind][b.id];
      for (size_t ui = 0; ui < updated_.elements.size(); ++ui) {
        const MElement& u = updated_.elements[ui];
        if (u.kind != b.kind || !AttributesSimilar(b, u, config_)) continue;
        list.push_back(u.id);
        strict_[b.kind].push_back({Score(b, u), bi, ui});
      }
    }
    for (auto& [kind, c] : strict_) SortCandidates(c);
  }

  // Pass 2 for one kind: repeated greedy sweeps, since a child becomes
  // assignable only after its parent is.
  void Assign(const std::string& kind) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (const Candidate& c : strict_[kind]) {
        const MElement& b = base_.elements[c.bi];
        const MElement& u = updated_.elements[c.ui];
        if (pairs_[kind].contains(b.id) || reverse_[kind].contains(u.id)) {
          continue;
        }
        if (!StrictRefsOk(b, u)) continue;
        Pair(kind, b.id, u.id);
        progress = true;
      }
    }
  }

  bool StrictRefsOk(const MElement& b, const MElement& u) const {
    for (const auto& ref : {"window", "parent", "source", "destination",
                            "widget"}) {
      if (!b.references.contains(ref) && !u.references.contains(ref)) {
        continue;
      }
      if (!RefPaired(pairs_, b, u, ref)) return false;
    }
    return true;
  }

  // Pass 3 for the given pairs.
  bool Changed(const std::string& kind, const std::string& bid,
               const std::string& uid) const {
    const MElement* b = base_.Find(kind, bid);
    const MElement* u = updated_.Find(kind, uid);
    if (b->attributes != u->attributes) return true;
    for (const auto& [ref, target] : b->references) {
      if (!RefPaired(pairs_, *b, *u, ref)) return true;
    }
    for (const auto& [ref, target] : u->references) {
      if (!b->references.contains(ref)) return true;
    }
    return false;
  }

  void Pair(const std::string& kind, const std::string& b,
            const std::string& u) {
    pairs_[kind][b] = u;
    reverse_[kind][u] = b;
  }

  // Pairs leftover elements of `kind` satisfying `corresponds`, greedily by
  // aggregate similarity.
  void Correspond(
      const std::string& kind,
      const std::function<bool(const MElement&, const MElement&)>& corresponds,
      std::set<std::string>& loose, std::vector<std::string>& log) {
    std::vector<Candidate> c;
    for (size_t bi = 0; bi < base_.elements.size(); ++bi) {
      const MElement& b = base_.elements[bi];
      if (b.kind != kind || pairs_[kind].contains(b.id)) continue;
      for (size_t ui = 0; ui < updated_.elements.size(); ++ui) {
        const MElement& u = updated_.elements[ui];
        if (u.kind != kind || reverse_[kind].contains(u.id)) continue;
        if (corresponds(b, u)) c.push_back({Score(b, u), bi, ui});
      }
    }
    SortCandidates(c);
    for (const Candidate& x : c) {
      const MElement& b = base_.elements[x.bi];
      const MElement& u = updated_.elements[x.ui];
      if (pairs_[kind].contains(b.id) || reverse_[kind].contains(u.id)) {
        continue;
      }
      std::vector<std::string> rivals;
      for (const Candidate& y : c) {
        if (&y == &x) continue;
        const MElement& ub = updated_.elements[y.ui];
        const MElement& bb = base_.elements[y.bi];
        if (y.bi == x.bi && !reverse_[kind].contains(ub.id)) {
          rivals.push_back("updated " + ub.id);
        } else if (y.ui == x.ui && !pairs_[kind].contains(bb.id)) {
          rivals.push_back("base " + bb.id);
        }
      }
      if (!rivals.empty()) {
        std::ostringstream msg;
        msg << kind << " " << b.id << " -> " << u.id << " (score " << x.score
            << ") preferred over";
        for (const auto& r : rivals) msg << " " << r;
        log.push_back(msg.str());
      }
      Pair(kind, b.id, u.id);
      loose.insert(b.id);
    }
  }

  const Pairs& pairs(const std::string& kind) { return pairs_[kind]; }
  const std::map<std::string, Pairs>& all_pairs() const { return pairs_; }
  void Seed(const Matching& m) {
    for (const auto& [kind, p] : m.pairs) {
      for (const auto& [b, u] : p) Pair(kind, b, u);
    }
  }
  std::vector<Candidate>& strict(const std::string& kind) {
    return strict_[kind];
  }

 private:
  const RcvModel& base_;
  const RcvModel& updated_;
  const DiffConfig& config_;
  std::map<std::string, Pairs> pairs_;
  std::map<std::string, Pairs> reverse_;
  std::map<std::string, std::vector<Candidate>> strict_;
};

std::vector<std::string> InOrder(const RcvModel& m, const std::string& kind,
                                 const Pairs& paired, bool updatedSide,
                                 const Pairs& reverse) {
  std::vector<std::string> out;
  for (const auto& e : m.elements) {
    if (e.kind != kind) continue;
    if (updatedSide ? reverse.contains(e.id) : paired.contains(e.id)) continue;
    out.push_back(e.id);
  }
  return out;
}

}  // namespace

const MElement* RcvModel::Find(std::string_view kind,
                               std::string_view id) const {
  for (const auto& e : elements) {
    if (e.kind == kind && e.id == id) return &e;
  }
  return nullptr;
}

std::vector<const MElement*> RcvModel::OfKind(std::string_view kind) const {
  std::vector<const MElement*> out;
  for (const auto& e : elements) {
    if (e.kind == kind) out.push_back(&e);
  }
  return out;
}

RcvModel EwtgToRcv(const Ewtg& ewtg) {
  RcvModel m;
  auto static_window = [&](const WindowId& id) {
    const Window* w = ewtg.FindWindow(id);
    return w != nullptr && !w->runtimeCreated;
  };
  auto static_widget = [&](const WidgetId& id) {
    const EwtgWidget* w = ewtg.FindWidget(id);
    return w != nullptr && !w->runtimeCreated && static_window(w->windowId);
  };
  for (const auto& win : ewtg.windows) {
    if (win.runtimeCreated) continue;
    size_t wi = m.elements.size();
    m.roots.push_back(wi);
    m.elements.push_back({win.id,
                          kWin,
                          {{"name", win.name},
                           {"kind", std::string(ToString(win.kind))},
                           {"className", win.className}},
                          {},
                          {}});
    for (const auto& w : ewtg.widgets) {
      if (w.windowId != win.id || !static_widget(w.id)) continue;
      MElement e{w.id,
                 kWid,
                 {{"className", w.className},
                  {"resourceId", w.resourceId},
                  {"contentDescription", w.contentDescription},
                  {"xpath", w.xpath}},
                 {{"window", win.id}},
                 {}};
      if (w.parentId && static_widget(*w.parentId)) {
        e.references["parent"] = *w.parentId;
      }
      m.elements[wi].subElements.push_back(m.elements.size());
      m.elements.push_back(std::move(e));
    }
    for (const auto& t : ewtg.windowTransitions) {
      if (t.sourceWindowId != win.id || t.runtimeCreated ||
          !static_window(t.destinationWindowId)) {
        continue;
      }
      const Input* in = ewtg.FindInput(t.inputId);
      if (in == nullptr || in->runtimeCreated) continue;
      if (in->widgetId && !static_widget(*in->widgetId)) continue;
      MElement e{t.id,
                 kTr,
                 {{"actionType", std::string(ToString(in->actionType))}},
                 {{"source", t.sourceWindowId},
                  {"destination", t.destinationWindowId}},
                 {}};
      if (in->widgetId) e.references["widget"] = *in->widgetId;
      m.elements[wi].subElements.push_back(m.elements.size());
      m.elements.push_back(std::move(e));
    }
  }
  return m;
}

double LevenshteinRatio(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<size_t> prev(b.size() + 1);
  std::vector<size_t> cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  double d = static_cast<double>(prev[b.size()]);
  return 1.0 - d / static_cast<double>(std::max(a.size(), b.size()));
}

double XpathSimilarity(std::string_view a, std::string_view b) {
  auto counts = [](std::string_view s) {
    std::map<std::string, double> out;
    size_t start = 0;
    while (start <= s.size()) {
      size_t slash = s.find('/', start);
      if (slash == std::string_view::npos) slash = s.size();
      if (slash > start) out[std::string(s.substr(start, slash - start))] += 1;
      start = slash + 1;
    }
    return out;
  };
  auto ca = counts(a);
  auto cb = counts(b);
  if (ca.empty() || cb.empty()) return ca.empty() && cb.empty() ? 1.0 : 0.0;
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, n] : ca) {
    na += n * n;
    auto it = cb.find(t);
    if (it != cb.end()) dot += n * it->second;
  }
  for (const auto& [t, n] : cb) nb += n * n;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string_view SimpleClassName(std::string_view className) {
  size_t dot = className.rfind('.');
  return dot == std::string_view::npos ? className
                                       : className.substr(dot + 1);
}

double AttributeSimilarity(std::string_view name, std::string_view a,
                           std::string_view b) {
  if (name == "xpath") return XpathSimilarity(a, b);
  if (name == "kind" || name == "actionType") return a == b ? 1.0 : 0.0;
  if (name == "className") {
    return LevenshteinRatio(SimpleClassName(a), SimpleClassName(b));
  }
  return LevenshteinRatio(a, b);
}

bool AttributeSimilar(std::string_view name, std::string_view a,
                      std::string_view b, const DiffConfig& config) {
  if (name == "kind" || name == "actionType") return a == b;
  double s = AttributeSimilarity(name, a, b);
  return s >= (name == "xpath" ? config.xpathThreshold
                               : config.levenshteinThreshold);
}

Matching MatchModels(const RcvModel& base, const RcvModel& updated,
                     const DiffConfig& config) {
  Matching out;
  Matcher m(base, updated, config);
  m.CollectCandidates(out);
  for (const auto& kind : {kWin, kWid, kTr}) m.Assign(kind);
  for (const auto& kind : {kWin, kWid, kTr}) {
    out.pairs[kind] = m.pairs(kind);
    for (const auto& [b, u] : out.pairs[kind]) {
      if (m.Changed(kind, b, u)) out.changed[kind].insert(b);
    }
  }
  return out;
}

DiffResult ClassifyCorrespondence(const Matching& matching, const Ewtg& base,
                                  const Ewtg& updated,
                                  const DiffConfig& config) {
  RcvModel rb = EwtgToRcv(base);
  RcvModel ru = EwtgToRcv(updated);
  for (const auto& [kind, p] : matching.pairs) {
    for (const auto& [b, u] : p) {
      if (rb.Find(kind, b) == nullptr || ru.Find(kind, u) == nullptr) {
        throw ModelError("matching pairs " + kind + " " + b + " -> " + u +
                         " which the EWTGs do not contain");
      }
    }
  }
  Matcher m(rb, ru, config);
  Matching scratch;
  m.CollectCandidates(scratch);
  m.Seed(matching);

  DiffResult out;
  std::map<std::string, std::set<std::string>> loose;
  const auto& pairs = m.all_pairs();

  m.Correspond(
      kWin,
      [&](const MElement& b, const MElement& u) {
        return b.attributes.at("kind") == u.attributes.at("kind") &&
               AttributeSimilar("className", b.attributes.at("className"),
                                u.attributes.at("className"), config);
      },
      loose[kWin], out.log);

  m.Assign(kWid);
  m.Correspond(
      kWid,
      [&](const MElement& b, const MElement& u) {
        if (!RefPaired(pairs, b, u, "window")) return false;
        if (AttributesSimilar(b, u, config)) return true;
        return AttributesSimilar(b, u, config, "className") &&
               RefPaired(pairs, b, u, "parent");
      },
      loose[kWid], out.log);

  m.Assign(kTr);
  m.Correspond(
      kTr,
      [&](const MElement& b, const MElement& u) {
        return RefPaired(pairs, b, u, "source") &&
               RefPaired(pairs, b, u, "widget") &&
               b.attributes.at("actionType") == u.attributes.at("actionType");
      },
      loose[kTr], out.log);

  auto fill = [&](const std::string& kind, ElementDiff& d) {
    Pairs reverse;
    for (const auto& [b, u] : m.pairs(kind)) {
      reverse[u] = b;
      if (loose[kind].contains(b) || m.Changed(kind, b, u)) {
        d.replaced[b] = u;
      } else {
        d.matched[b] = u;
      }
    }
    d.deleted = InOrder(rb, kind, m.pairs(kind), false, reverse);
    d.added = InOrder(ru, kind, m.pairs(kind), true, reverse);
  };
  fill(kWin, out.windows);
  fill(kWid, out.widgets);
  fill(kTr, out.transitions);
  return out;
}

DiffResult DiffEwtgs(const Ewtg& base, const Ewtg& updated,
                     const DiffConfig& config) {
  return ClassifyCorrespondence(
      MatchModels(EwtgToRcv(base), EwtgToRcv(updated), config), base, updated,
      config);
}

std::set<WidgetId> DiffResult::AddedOrReplacedUpdatedWidgets() const {
  std::set<WidgetId> out(widgets.added.begin(), widgets.added.end());
  for (const auto& [b, u] : widgets.replaced) out.insert(u);
  return out;
}

std::map<std::string, std::string> DiffResult::Pairing(
    std::string_view kind) const {
  const ElementDiff& d = kind == kWindowElement   ? windows
                         : kind == kWidgetElement ? widgets
                                                  : transitions;
  Pairs out = d.matched;
  out.insert(d.replaced.begin(), d.replaced.end());
  return out;
}

bool DiffResult::Empty() const {
  for (const ElementDiff* d : {&windows, &widgets, &transitions}) {
    if (!d->added.empty() || !d->deleted.empty() || !d->replaced.empty()) {
      return false;
    }
  }
  return true;
}

nlohmann::json ToJson(const DiffResult& diff) {
  nlohmann::json out = nlohmann::json::object();
  auto put = [&](const std::string& suffix, const ElementDiff& d) {
    out["added" + suffix] = d.added;
    out["deleted" + suffix] = d.deleted;
    out["replaced" + suffix] = d.replaced;
    out["matched" + suffix] = d.matched;
  };
  put("Windows", diff.windows);
  put("Widgets", diff.widgets);
  put("Transitions", diff.transitions);
  out["log"] = diff.log;
  return out;
}

DiffResult DiffFromJson(const nlohmann::json& doc) {
  DiffResult out;
  auto get = [&](const std::string& suffix, ElementDiff& d) {
    try {
      d.added = doc.at("added" + suffix).get<std::vector<std::string>>();
      d.deleted = doc.at("deleted" + suffix).get<std::vector<std::string>>();
      d.replaced = doc.at("replaced" + suffix).get<Pairs>();
      d.matched = doc.value("matched" + suffix, Pairs{});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("diff document: " + std::string(e.what()));
    }
  };
  get("Windows", out.windows);
  get("Widgets", out.widgets);
  get("Transitions", out.transitions);
  if (doc.contains("log")) out.log = doc["log"].get<std::vector<std::string>>();
  return out;
}

}  // namespace carryover
