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

#include "carryover/harness.h"

#include <algorithm>
#include <functional>

#include "carryover/model_io.h"

namespace carryover {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw SpecError(where + ": " + what);
}

std::string GetStr(const json& j, const char* key, const std::string& where,
                   std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    Fail(where, std::string("missing '") + key + "'");
  }
  if (!j[key].is_string()) Fail(where, std::string("'") + key + "' not a string");
  return j[key].get<std::string>();
}

bool GetBool(const json& j, const char* key, const std::string& where,
             bool fallback = false) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) Fail(where, std::string("'") + key + "' not a boolean");
  return j[key].get<bool>();
}

std::optional<std::string> GetOptStr(const json& j, const char* key,
                                     const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return GetStr(j, key, where);
}

InputSpec ParseInput(const json& j, const std::string& where) {
  InputSpec in;
  in.id = GetStr(j, "id", where);
  try {
    in.actionType = ParseActionType(GetStr(j, "actionType", where, "Click"));
  } catch (const ModelError& e) {
    Fail(where, e.what());
  }
  return in;
}

WidgetSpec ParseWidget(const json& j, const std::string& where) {
  WidgetSpec w;
  w.id = GetStr(j, "id", where);
  std::string here = where + "/" + w.id;
  w.className = GetStr(j, "className", here);
  w.resourceId = GetStr(j, "resourceId", here, "");
  w.contentDescription = GetStr(j, "contentDescription", here, "");
  w.text = GetStr(j, "text", here, "");
  w.textVar = GetOptStr(j, "textVar", here);
  if (j.contains("textPool")) {
    w.textPool = j["textPool"].get<std::vector<std::string>>();
  }
  w.launchVaryingPrefix = GetOptStr(j, "launchVaryingPrefix", here);
  w.clickable = GetBool(j, "clickable", here);
  w.longClickable = GetBool(j, "longClickable", here);
  w.scrollable = GetBool(j, "scrollable", here);
  w.isInputField = GetBool(j, "isInputField", here);
  w.password = GetBool(j, "password", here);
  w.checked = GetBool(j, "checked", here);
  w.boundVar = GetOptStr(j, "boundVar", here);
  w.visibleWhen = j.value("visibleWhen", json());
  w.enabledWhen = j.value("enabledWhen", json());
  w.selectedWhen = j.value("selectedWhen", json());
  w.hidden = GetBool(j, "hidden", here);
  w.repeatVar = GetOptStr(j, "repeatVar", here);
  w.dynamicOnly = GetBool(j, "dynamicOnly", here);
  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    w.bounds = Bounds{b.value("x", 0), b.value("y", 0), b.value("width", 0),
                      b.value("height", 0)};
  }
  for (const auto& in : j.value("inputs", json::array())) {
    w.inputs.push_back(ParseInput(in, here));
  }
  for (const auto& c : j.value("children", json::array())) {
    w.children.push_back(ParseWidget(c, here));
  }
  return w;
}

void ForEachWidget(const std::vector<WidgetSpec>& widgets,
                   const std::function<void(const WidgetSpec&,
                                            const WidgetSpec*)>& fn,
                   const WidgetSpec* parent = nullptr) {
  for (const auto& w : widgets) {
    fn(w, parent);
    ForEachWidget(w.children, fn, &w);
  }
}

const WidgetSpec* FindWidgetSpec(const std::vector<WidgetSpec>& widgets,
                                 std::string_view id) {
  for (const auto& w : widgets) {
    if (w.id == id) return &w;
    if (const WidgetSpec* c = FindWidgetSpec(w.children, id)) return c;
  }
  return nullptr;
}

void CheckCondition(const json& c, const std::set<std::string>& vars,
                    const std::string& where) {
  if (c.is_null() || c.is_boolean()) return;
  if (!c.is_object()) Fail(where, "condition must be an object");
  if (c.contains("all") || c.contains("any")) {
    for (const auto& x : c.contains("all") ? c["all"] : c["any"]) {
      CheckCondition(x, vars, where);
    }
    return;
  }
  if (c.contains("not")) {
    CheckCondition(c["not"], vars, where);
    return;
  }
  if (!c.contains("var") || !c["var"].is_string()) {
    Fail(where, "condition without 'var'");
  }
  if (!vars.contains(c["var"].get<std::string>())) {
    Fail(where, "condition reads undeclared variable '" +
                    c["var"].get<std::string>() + "'");
  }
  if (!c.contains("eq") && !c.contains("ne") && !c.contains("lt") &&
      !c.contains("gt")) {
    Fail(where, "condition without comparison");
  }
}

VersionSpec ParseVersion(const json& j, const std::string& appWhere) {
  VersionSpec v;
  v.version = GetStr(j, "version", appWhere);
  const std::string where = appWhere + "/" + v.version;

  std::set<std::string> vars;
  for (const auto& s : j.value("stateVariables", json::array())) {
    VariableSpec var;
    var.name = GetStr(s, "name", where);
    var.type = GetStr(s, "type", where, "bool");
    var.persistent = GetBool(s, "persistent", where);
    if (var.type == "bool") {
      var.initial = s.value("initial", json(false));
      if (!var.initial.is_boolean()) Fail(where, var.name + ": bad initial");
    } else if (var.type == "int") {
      var.initial = s.value("initial", json(0));
      if (!var.initial.is_number_integer()) {
        Fail(where, var.name + ": bad initial");
      }
    } else if (var.type == "string") {
      var.initial = s.value("initial", json(""));
      if (!var.initial.is_string()) Fail(where, var.name + ": bad initial");
    } else {
      Fail(where, "variable '" + var.name + "' has unknown type " + var.type);
    }
    if (!vars.insert(var.name).second) {
      Fail(where, "duplicate variable '" + var.name + "'");
    }
    v.stateVariables.push_back(std::move(var));
  }
  auto var_type = [&](const std::string& name) -> std::string {
    for (const auto& s : v.stateVariables) {
      if (s.name == name) return s.type;
    }
    return "";
  };

  if (j.contains("methods")) {
    for (const auto& [m, n] : j["methods"].items()) {
      if (!n.is_number_integer() || n.get<int>() < 1) {
        Fail(where, "method '" + m + "' needs a positive instruction count");
      }
      v.methods[m] = n.get<int>();
    }
  }

  if (!j.contains("windows") || !j["windows"].is_array() ||
      j["windows"].empty()) {
    Fail(where, "no windows");
  }
  std::set<std::string> window_ids, widget_ids, input_ids;
  for (const auto& wj : j["windows"]) {
    WindowSpec w;
    w.id = GetStr(wj, "id", where);
    if (w.id == kOutOfAppWindow) Fail(where, "window id is reserved");
    w.name = GetStr(wj, "name", where, w.id);
    try {
      w.kind = ParseWindowKind(GetStr(wj, "kind", where, "Activity"));
    } catch (const ModelError& e) {
      Fail(where, e.what());
    }
    w.className = GetStr(wj, "className", where, w.name);
    w.dynamicOnly = GetBool(wj, "dynamicOnly", where);
    if (auto level = GetOptStr(wj, "abstractionLevel", where)) {
      try {
        w.abstractionLevel = ParseAbstractionLevel(*level);
      } catch (const ModelError& e) {
        Fail(where, e.what());
      }
    }
    for (const auto& x : wj.value("widgets", json::array())) {
      w.widgets.push_back(ParseWidget(x, where + "/" + w.id));
    }
    for (const auto& x : wj.value("inputs", json::array())) {
      w.inputs.push_back(ParseInput(x, where + "/" + w.id));
    }
    if (std::none_of(w.inputs.begin(), w.inputs.end(), [](const auto& i) {
          return i.actionType == ActionType::kPressBack;
        })) {
      w.inputs.push_back({w.id + ".back", ActionType::kPressBack});
    }
    if (!window_ids.insert(w.id).second) {
      Fail(where, "duplicate window id '" + w.id + "'");
    }
    ForEachWidget(w.widgets, [&](const WidgetSpec& x, const WidgetSpec*) {
      if (!widget_ids.insert(x.id).second) {
        Fail(where, "duplicate widget id '" + x.id + "'");
      }
      for (const auto& in : x.inputs) {
        if (!input_ids.insert(in.id).second) {
          Fail(where, "duplicate input id '" + in.id + "'");
        }
      }
      for (const auto* ref : {&x.textVar, &x.boundVar, &x.repeatVar}) {
        if (*ref && !vars.contains(**ref)) {
          Fail(where, "widget '" + x.id + "' uses undeclared variable '" +
                          **ref + "'");
        }
      }
      if (x.boundVar && var_type(*x.boundVar) != "bool") {
        Fail(where, "boundVar of '" + x.id + "' must be bool");
      }
      if (x.repeatVar && var_type(*x.repeatVar) != "int") {
        Fail(where, "repeatVar of '" + x.id + "' must be int");
      }
      CheckCondition(x.visibleWhen, vars, where + "/" + x.id);
      CheckCondition(x.enabledWhen, vars, where + "/" + x.id);
      CheckCondition(x.selectedWhen, vars, where + "/" + x.id);
    });
    for (const auto& in : w.inputs) {
      if (!input_ids.insert(in.id).second) {
        Fail(where, "duplicate input id '" + in.id + "'");
      }
    }
    v.windows.push_back(std::move(w));
  }
  int launchers = 0;
  for (const auto& w : v.windows) {
    if (w.kind == WindowKind::kLauncher) ++launchers;
  }
  if (launchers != 1) {
    Fail(where, "expected exactly one Launcher window, found " +
                    std::to_string(launchers));
  }

  const json handlers = j.value("handlers", json::object());
  for (const auto& [input, cj] : handlers.items()) {
    if (!input_ids.contains(input)) {
      Fail(where, "handler for unknown input '" + input + "'");
    }
    std::vector<Command> commands;
    const json& list = cj.is_array() ? cj : json::array({cj});
    for (const auto& c : list) {
      Command cmd;
      const std::string here = where + "/handlers/" + input;
      cmd.when = c.value("when", json());
      CheckCondition(cmd.when, vars, here);
      for (const auto& e : c.value("effects", json::array())) {
        Effect eff;
        for (const char* op : {"set", "add", "toggle", "show", "hide",
                               "setText", "navigate", "backTo", "back",
                               "outOfApp"}) {
          if (e.contains(op)) {
            eff.op = op;
            eff.target = e[op].is_string() ? e[op].get<std::string>() : "";
          }
        }
        eff.value = e.value("value", json());
        if (eff.op.empty()) Fail(here, "effect without operation");
        if ((eff.op == "set" || eff.op == "add" || eff.op == "toggle") &&
            !vars.contains(eff.target)) {
          Fail(here, "effect writes undeclared variable '" + eff.target + "'");
        }
        if (eff.op == "add" && var_type(eff.target) != "int") {
          Fail(here, "add needs an int variable");
        }
        if (eff.op == "toggle" && var_type(eff.target) != "bool") {
          Fail(here, "toggle needs a bool variable");
        }
        if ((eff.op == "navigate" || eff.op == "backTo") &&
            !window_ids.contains(eff.target)) {
          Fail(here, "effect names unknown window '" + eff.target + "'");
        }
        if ((eff.op == "show" || eff.op == "hide" || eff.op == "setText") &&
            !widget_ids.contains(eff.target)) {
          Fail(here, "effect names unknown widget '" + eff.target + "'");
        }
        cmd.effects.push_back(std::move(eff));
      }
      const json covers = c.value("covers", json::object());
      for (const auto& [m, range] : covers.items()) {
        auto it = v.methods.find(m);
        if (it == v.methods.end()) {
          Fail(here, "covers undeclared method '" + m + "'");
        }
        int lo = range.at(0).get<int>();
        int hi = range.at(1).get<int>();
        if (lo < 1 || hi < lo || hi > it->second) {
          Fail(here, "range of '" + m + "' outside [1, " +
                         std::to_string(it->second) + "]");
        }
        cmd.covers[m] = {lo, hi};
      }
      commands.push_back(std::move(cmd));
    }
    v.handlers[input] = std::move(commands);
  }
  for (const auto& pair : j.value("related_windows", json::array())) {
    auto a = pair.at(0).get<std::string>();
    auto b = pair.at(1).get<std::string>();
    if (!window_ids.contains(a) || !window_ids.contains(b)) {
      Fail(where, "related_windows names an unknown window");
    }
    v.relatedWindows.emplace_back(a, b);
  }
  const json text_values = j.value("textValues", json::object());
  for (const auto& [w, values] : text_values.items()) {
    if (!widget_ids.contains(w)) Fail(where, "textValues for unknown widget");
    v.textValues[w] = values.get<std::vector<std::string>>();
  }
  for (const auto& m : j.value("updatedMethods", json::array())) {
    v.updatedMethods.insert(m.get<std::string>());
  }
  return v;
}

std::string VarText(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool Compare(const json& actual, const json& c) {
  if (c.contains("eq")) return actual == c["eq"];
  if (c.contains("ne")) return actual != c["ne"];
  if (c.contains("lt")) return actual < c["lt"];
  return actual > c["gt"];
}

}  // namespace

const WindowSpec* VersionSpec::FindWindow(std::string_view id) const {
  for (const auto& w : windows) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

const WindowSpec& VersionSpec::Launcher() const {
  for (const auto& w : windows) {
    if (w.kind == WindowKind::kLauncher) return w;
  }
  throw SpecError("version " + version + " has no launcher");
}

size_t AppSpec::IndexOf(std::string_view version) const {
  for (size_t i = 0; i < versions.size(); ++i) {
    if (versions[i].version == version) return i;
  }
  throw SpecError("app " + appId + " has no version '" + std::string(version) +
                  "'");
}

const VersionSpec& AppSpec::Version(std::string_view version) const {
  return versions[IndexOf(version)];
}

AppSpec ParseSpec(const json& doc) {
  AppSpec spec;
  try {
    if (!doc.is_object()) Fail("spec", "not an object");
    spec.appId = GetStr(doc, "appId", "spec");
    if (!doc.contains("versions") || doc["versions"].empty()) {
      Fail(spec.appId, "no versions");
    }
    std::set<std::string> tags;
    for (const auto& v : doc["versions"]) {
      spec.versions.push_back(ParseVersion(v, spec.appId));
      if (!tags.insert(spec.versions.back().version).second) {
        Fail(spec.appId, "duplicate version tag");
      }
    }
  } catch (const json::exception& e) {
    throw SpecError("malformed app spec: " + std::string(e.what()));
  }
  return spec;
}

AppSpec LoadSpec(const std::filesystem::path& path) {
  json doc;
  try {
    doc = ParseJsonText(ReadFile(path));
  } catch (const ParseError& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  return ParseSpec(doc);
}

Ewtg ExportEwtg(const AppSpec& spec, size_t version) {
  const VersionSpec& v = spec.versions.at(version);
  Ewtg e;
  auto methods_of = [&](const InputId& id) {
    std::set<MethodId> out;
    auto it = v.handlers.find(id);
    if (it == v.handlers.end()) return out;
    for (const auto& c : it->second) {
      for (const auto& [m, r] : c.covers) out.insert(m);
    }
    return out;
  };
  auto exported = [&](const WindowId& id) {
    const WindowSpec* w = v.FindWindow(id);
    return w != nullptr && !w->dynamicOnly;
  };
  for (const auto& ws : v.windows) {
    if (ws.dynamicOnly) continue;
    Window win{ws.id, ws.name, ws.kind, ws.className, false, {}};
    std::vector<Input> inputs;
    std::function<void(const WidgetSpec&, const std::string&,
                       std::optional<WidgetId>)>
        visit = [&](const WidgetSpec& w, const std::string& xpath,
                    std::optional<WidgetId> parent) {
          if (w.dynamicOnly) return;
          std::string here = xpath + "/" + w.className;
          e.widgets.push_back({w.id, ws.id, w.className, w.resourceId,
                               w.contentDescription, here, parent, false});
          win.widgetIds.insert(w.id);
          for (const auto& in : w.inputs) {
            inputs.push_back(
                {in.id, ws.id, w.id, in.actionType, methods_of(in.id), false});
          }
          for (const auto& c : w.children) visit(c, here, w.id);
        };
    for (const auto& w : ws.widgets) {
      visit(w, std::string(kRootClass), std::nullopt);
    }
    for (const auto& in : ws.inputs) {
      inputs.push_back(
          {in.id, ws.id, std::nullopt, in.actionType, methods_of(in.id), false});
    }
    for (const auto& in : inputs) {
      std::set<WindowId> dests;
      auto it = v.handlers.find(in.id);
      if (it != v.handlers.end()) {
        for (const auto& c : it->second) {
          for (const auto& eff : c.effects) {
            if ((eff.op == "navigate" || eff.op == "backTo") &&
                exported(eff.target)) {
              dests.insert(eff.target);
            }
          }
        }
      }
      for (const auto& d : dests) {
        e.windowTransitions.push_back(
            {in.id + ">" + d, ws.id, d, in.id, false});
      }
    }
    e.inputs.insert(e.inputs.end(), inputs.begin(), inputs.end());
    e.windows.push_back(std::move(win));
  }
  return e;
}

AppModel ExportModel(const AppSpec& spec, size_t version) {
  AppModel m;
  m.version = spec.versions.at(version).version;
  m.ewtg = ExportEwtg(spec, version);
  for (const auto& w : spec.versions.at(version).windows) {
    if (!w.dynamicOnly && w.abstractionLevel) {
      m.dstg.abstractionPolicy[w.id] = *w.abstractionLevel;
    }
  }
  return m;
}

TargetManifest DiffTargets(const AppSpec& spec, size_t version) {
  const VersionSpec& v = spec.versions.at(version);
  TargetManifest out;
  out.instructionCounts = v.methods;
  if (version == 0) {
    for (const auto& [m, n] : v.methods) out.updatedMethodIds.insert(m);
    return out;
  }
  const VersionSpec& prev = spec.versions.at(version - 1);
  for (const auto& [m, n] : v.methods) {
    auto it = prev.methods.find(m);
    if (it == prev.methods.end() || it->second != n ||
        v.updatedMethods.contains(m)) {
      out.updatedMethodIds.insert(m);
    }
  }
  return out;
}

// --- Driver ----------------------------------------------------------------

SimDriver::SimDriver(const AppSpec& spec, size_t version,
                     unsigned long long seed, long long epoch)
    : spec_(spec), version_(spec.versions.at(version)), seed_(seed),
      epoch_(epoch) {
  for (const auto& s : version_.stateVariables) vars_[s.name] = s.initial;
  window_ = version_.Launcher().id;
}

const json& SimDriver::Variable(const std::string& name) const {
  return vars_.at(name);
}

StepResult SimDriver::Reset() {
  ++launches_;
  for (const auto& s : version_.stateVariables) {
    if (!s.persistent) vars_[s.name] = s.initial;
  }
  window_ = version_.Launcher().id;
  backStack_.clear();
  shown_.clear();
  texts_.clear();
  return {Render(), {}};
}

Observation SimDriver::Current() const { return Render(); }

bool SimDriver::Holds(const json& c) const {
  if (c.is_null()) return true;
  if (c.is_boolean()) return c.get<bool>();
  if (c.contains("all")) {
    return std::all_of(c["all"].begin(), c["all"].end(),
                       [&](const json& x) { return Holds(x); });
  }
  if (c.contains("any")) {
    return std::any_of(c["any"].begin(), c["any"].end(),
                       [&](const json& x) { return Holds(x); });
  }
  if (c.contains("not")) return !Holds(c["not"]);
  return Compare(vars_.at(c["var"].get<std::string>()), c);
}

bool SimDriver::Visible(const WidgetSpec& w) const {
  auto it = shown_.find(w.id);
  bool shown = it == shown_.end() ? !w.hidden : it->second;
  return shown && Holds(w.visibleWhen);
}

std::string SimDriver::TextOf(const WidgetSpec& w, int copy) const {
  if (auto it = texts_.find(w.id); it != texts_.end()) return it->second;
  if (w.textVar) return VarText(vars_.at(*w.textVar));
  if (w.launchVaryingPrefix) {
    return *w.launchVaryingPrefix + "-" + std::to_string(seed_) + "-" +
           std::to_string(epoch_) + "-" + std::to_string(launches_);
  }
  if (!w.textPool.empty()) {
    return w.textPool[static_cast<size_t>(copy) % w.textPool.size()];
  }
  return w.text;
}

void SimDriver::RenderWidget(const WidgetSpec& w, GuiNode& parent,
                             const std::string& parentPath,
                             std::map<std::string, Rendered>& index) const {
  if (!Visible(w)) return;
  int copies = 1;
  if (w.repeatVar) copies = std::max(0, vars_.at(*w.repeatVar).get<int>());
  for (int k = 0; k < copies; ++k) {
    GuiNode node;
    node.resourceId = w.resourceId;
    node.className = w.className;
    node.contentDescription = w.contentDescription;
    node.text = TextOf(w, k);
    node.password = w.password;
    node.clickable = w.clickable;
    node.longClickable = w.longClickable;
    node.scrollable = w.scrollable;
    node.isInputField = w.isInputField;
    node.checked = w.boundVar ? vars_.at(*w.boundVar).get<bool>() : w.checked;
    node.enabled = Holds(w.enabledWhen);
    node.selected = !w.selectedWhen.is_null() && Holds(w.selectedWhen);
    node.boundsHint = w.bounds;
    std::string path = (parentPath.empty() ? "" : parentPath + "/") +
                       std::to_string(parent.children.size());
    index[path] = {&w, k};
    for (const auto& c : w.children) RenderWidget(c, node, path, index);
    node.hasChildren = !node.children.empty();
    parent.children.push_back(std::move(node));
  }
}

Observation SimDriver::Render() const {
  Observation o;
  index_.clear();
  o.tree.root.className = std::string(kRootClass);
  if (window_ == kOutOfAppWindow) {
    o.tree.windowId = std::string(kOutOfAppWindow);
    o.kind = WindowKind::kOutOfApp;
    o.windowName = o.className = std::string(kOutOfAppWindow);
    return o;
  }
  const WindowSpec* w = version_.FindWindow(window_);
  o.tree.windowId = w->id;
  o.kind = w->kind;
  o.windowName = w->name;
  o.className = w->className;
  for (const auto& x : w->widgets) RenderWidget(x, o.tree.root, "", index_);
  o.tree.root.hasChildren = !o.tree.root.children.empty();
  return o;
}

void SimDriver::Navigate(const WindowId& to) {
  backStack_.push_back(window_);
  window_ = to;
}

void SimDriver::Back() {
  if (backStack_.empty()) {
    window_ = std::string(kOutOfAppWindow);
    return;
  }
  window_ = backStack_.back();
  backStack_.pop_back();
}

void SimDriver::Apply(const Effect& e) {
  if (e.op == "set") {
    vars_[e.target] = e.value;
  } else if (e.op == "add") {
    vars_[e.target] = vars_[e.target].get<long long>() +
                      (e.value.is_null() ? 1 : e.value.get<long long>());
  } else if (e.op == "toggle") {
    vars_[e.target] = !vars_[e.target].get<bool>();
  } else if (e.op == "show") {
    shown_[e.target] = true;
  } else if (e.op == "hide") {
    shown_[e.target] = false;
  } else if (e.op == "setText") {
    texts_[e.target] = e.value.is_string() ? e.value.get<std::string>() : "";
  } else if (e.op == "navigate") {
    Navigate(e.target);
  } else if (e.op == "back") {
    Back();
  } else if (e.op == "backTo") {
    while (!backStack_.empty() && backStack_.back() != e.target) {
      backStack_.pop_back();
    }
    if (backStack_.empty()) {
      window_ = e.target;
    } else {
      Back();
    }
  } else if (e.op == "outOfApp") {
    backStack_.clear();
    window_ = std::string(kOutOfAppWindow);
  }
}

InstructionSet SimDriver::Fire(const InputId& input) {
  InstructionSet out;
  auto it = version_.handlers.find(input);
  if (it == version_.handlers.end()) return out;
  for (const auto& c : it->second) {
    if (!Holds(c.when)) continue;
    for (const auto& [m, range] : c.covers) {
      for (int i = range.first; i <= range.second; ++i) out[m].insert(i);
    }
    for (const auto& e : c.effects) Apply(e);
    break;
  }
  return out;
}

StepResult SimDriver::Perform(const Action& action) {
  if (action.actionType == ActionType::kResetApp) return Reset();
  if (window_ == kOutOfAppWindow) {
    throw DriverRejection("the app is not in the foreground");
  }
  const WindowSpec* win = version_.FindWindow(window_);
  InstructionSet executed;
  if (IsWindowLevel(action.actionType)) {
    const InputSpec* input = nullptr;
    for (const auto& in : win->inputs) {
      if (in.actionType == action.actionType) input = &in;
    }
    if (input != nullptr && version_.handlers.contains(input->id)) {
      executed = Fire(input->id);
    } else if (action.actionType == ActionType::kPressBack) {
      Back();
    }
    return {Render(), executed};
  }
  if (!action.concreteNodePath) {
    throw DriverRejection(std::string(ToString(action.actionType)) +
                          " needs a target node");
  }
  Render();
  auto it = index_.find(*action.concreteNodePath);
  if (it == index_.end()) {
    throw DriverRejection("no visible node at '" + *action.concreteNodePath +
                          "'");
  }
  const WidgetSpec& w = *it->second.spec;
  bool capable = false;
  switch (action.actionType) {
    case ActionType::kClick:
    case ActionType::kItemClick:
      capable = w.clickable;
      break;
    case ActionType::kLongClick:
    case ActionType::kItemLongClick:
      capable = w.longClickable;
      break;
    case ActionType::kSwipe:
      capable = w.scrollable;
      break;
    case ActionType::kTextFill:
      capable = w.isInputField;
      break;
    default:
      break;
  }
  if (!capable || !Holds(w.enabledWhen)) {
    throw DriverRejection("widget '" + w.id + "' does not accept " +
                          std::string(ToString(action.actionType)));
  }
  if (action.actionType == ActionType::kTextFill) {
    std::string text = action.dataPayload.value_or("");
    texts_[w.id] = text;
    if (w.textVar) vars_[*w.textVar] = text;
  }
  if (action.actionType == ActionType::kClick && w.boundVar) {
    vars_[*w.boundVar] = !vars_[*w.boundVar].get<bool>();
  }
  for (const auto& in : w.inputs) {
    if (in.actionType == action.actionType) {
      executed = Fire(in.id);
      break;
    }
  }
  return {Render(), executed};
}

}  // namespace carryover
