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

#include "carryover/model_io.h"

#include <fstream>
#include <sstream>

namespace carryover {
namespace {

using nlohmann::json;

std::string JoinViolations(const std::vector<std::string>& v) {
  std::string out = "model integrity violated:";
  for (const auto& line : v) out += "\n  " + line;
  return out;
}

// A cursor over a JSON value that remembers where it is for error messages.
class Node {
 public:
  Node(const json& value, std::string path)
      : value_(value), path_(std::move(path)) {}

  const json& value() const { return value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError("at " + (path_.empty() ? std::string("/") : path_) +
                     ": " + what);
  }

  void ExpectObject() const {
    if (!value_.is_object()) Fail("expected an object");
  }
  bool Has(const std::string& key) const {
    return value_.is_object() && value_.contains(key) &&
           !value_.at(key).is_null();
  }
  Node At(const std::string& key) const {
    ExpectObject();
    if (!value_.contains(key)) Fail("missing key '" + key + "'");
    return Node(value_.at(key), path_ + "/" + key);
  }
  std::vector<Node> Items() const {
    if (!value_.is_array()) Fail("expected an array");
    std::vector<Node> out;
    for (size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_[i], path_ + "/" + std::to_string(i));
    }
    return out;
  }
  std::vector<Node> ItemsOr(const std::string& key) const {
    return Has(key) ? At(key).Items() : std::vector<Node>{};
  }

  std::string Str() const {
    if (!value_.is_string()) Fail("expected a string");
    return value_.get<std::string>();
  }
  bool Bool() const {
    if (!value_.is_boolean()) Fail("expected a boolean");
    return value_.get<bool>();
  }
  long long Int() const {
    if (!value_.is_number_integer()) Fail("expected an integer");
    return value_.get<long long>();
  }
  std::string Str(const std::string& key) const { return At(key).Str(); }
  std::string StrOr(const std::string& key, std::string fallback) const {
    return Has(key) ? At(key).Str() : fallback;
  }
  bool BoolOr(const std::string& key, bool fallback) const {
    return Has(key) ? At(key).Bool() : fallback;
  }
  std::optional<std::string> OptStr(const std::string& key) const {
    if (!Has(key)) return std::nullopt;
    return At(key).Str();
  }
  std::set<std::string> StrSet(const std::string& key) const {
    std::set<std::string> out;
    for (const Node& n : ItemsOr(key)) out.insert(n.Str());
    return out;
  }

 private:
  const json& value_;
  std::string path_;
};

template <typename F>
auto Wrap(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ModelError& e) {
    throw ParseError(e.what());
  }
}

json OptJson(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

Valuations ValuationsFrom(const Node& n) {
  n.ExpectObject();
  Valuations out;
  for (const auto& [key, value] : n.value().items()) {
    if (value.is_boolean()) {
      out[key] = value.get<bool>();
    } else if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else {
      Node(value, n.path() + "/" + key).Fail("expected a string or boolean");
    }
  }
  return out;
}

LayoutFingerprint FingerprintFrom(const Node& n) {
  LayoutFingerprint out;
  for (const Node& entry : n.Items()) {
    long long count = entry.At("count").Int();
    if (count < 1) entry.Fail("fingerprint count must be positive");
    out[ValuationsFrom(entry.At("valuations"))] += static_cast<int>(count);
  }
  return out;
}

constexpr std::string_view kNodeKeys[] = {
    "resourceId", "className", "contentDescription", "text",
    "password",   "clickable", "longClickable",      "scrollable",
    "checked",    "enabled",   "selected",           "isInputField",
    "hasChildren"};

GuiNode GuiNodeFrom(const Node& n) {
  n.ExpectObject();
  Node props = n.At("properties");
  props.ExpectObject();
  for (const auto& [key, value] : props.value().items()) {
    bool known = false;
    for (auto k : kNodeKeys) known = known || k == key;
    if (!known) {
      throw PropertyClosureError("at " + props.path() +
                                 ": unknown GUI node property '" + key + "'");
    }
  }
  auto need = [&](std::string_view key) {
    if (!props.value().contains(std::string(key))) {
      throw PropertyClosureError("at " + props.path() +
                                 ": missing GUI node property '" +
                                 std::string(key) + "'");
    }
    return props.At(std::string(key));
  };
  GuiNode node;
  node.resourceId = need("resourceId").Str();
  node.className = need("className").Str();
  node.contentDescription = need("contentDescription").Str();
  node.text = need("text").Str();
  node.password = need("password").Bool();
  node.clickable = need("clickable").Bool();
  node.longClickable = need("longClickable").Bool();
  node.scrollable = need("scrollable").Bool();
  node.checked = need("checked").Bool();
  node.enabled = need("enabled").Bool();
  node.selected = need("selected").Bool();
  node.isInputField = need("isInputField").Bool();
  node.hasChildren = need("hasChildren").Bool();
  for (const Node& c : n.ItemsOr("children")) {
    node.children.push_back(GuiNodeFrom(c));
  }
  if (n.Has("boundsHint")) {
    Node b = n.At("boundsHint");
    node.boundsHint = Bounds{static_cast<int>(b.At("x").Int()),
                             static_cast<int>(b.At("y").Int()),
                             static_cast<int>(b.At("width").Int()),
                             static_cast<int>(b.At("height").Int())};
  }
  return node;
}

GuiTree GuiTreeFrom(const Node& n) {
  GuiTree t;
  t.id = n.Str("id");
  t.windowId = n.Str("windowId");
  t.root = GuiNodeFrom(n.At("root"));
  t.abstractStateId = n.Str("abstractStateId");
  t.sessionIndex = static_cast<int>(n.At("sessionIndex").Int());
  return t;
}

Action ActionFrom(const Node& n) {
  Action a;
  a.inputId = n.OptStr("inputId");
  a.actionType = ParseActionType(n.Str("actionType"));
  a.concreteNodePath = n.OptStr("concreteNodePath");
  a.dataPayload = n.OptStr("dataPayload");
  if (n.Has("cost")) {
    const json& c = n.At("cost").value();
    if (!c.is_number() || c.get<double>() != a.cost()) {
      n.At("cost").Fail("cost disagrees with the action type");
    }
  }
  return a;
}

Ewtg EwtgFrom(const Node& n) {
  n.ExpectObject();
  Ewtg e;
  for (const Node& w : n.ItemsOr("windows")) {
    Window win;
    win.id = w.Str("id");
    win.name = w.StrOr("name", "");
    win.kind = ParseWindowKind(w.Str("kind"));
    win.className = w.StrOr("className", "");
    win.runtimeCreated = w.BoolOr("runtimeCreated", false);
    win.widgetIds = w.StrSet("widgetIds");
    e.windows.push_back(std::move(win));
  }
  for (const Node& w : n.ItemsOr("widgets")) {
    EwtgWidget widget;
    widget.id = w.Str("id");
    widget.windowId = w.Str("windowId");
    widget.className = w.StrOr("className", "");
    widget.resourceId = w.StrOr("resourceId", "");
    widget.contentDescription = w.StrOr("contentDescription", "");
    widget.xpath = w.StrOr("xpath", "");
    widget.parentId = w.OptStr("parentId");
    widget.runtimeCreated = w.BoolOr("runtimeCreated", false);
    e.widgets.push_back(std::move(widget));
  }
  for (const Node& i : n.ItemsOr("inputs")) {
    Input input;
    input.id = i.Str("id");
    input.windowId = i.Str("windowId");
    input.widgetId = i.OptStr("widgetId");
    input.actionType = ParseActionType(i.Str("actionType"));
    input.handlerMethodIds = i.StrSet("handlerMethodIds");
    input.runtimeCreated = i.BoolOr("runtimeCreated", false);
    e.inputs.push_back(std::move(input));
  }
  for (const Node& t : n.ItemsOr("windowTransitions")) {
    WindowTransition tr;
    tr.id = t.Str("id");
    tr.sourceWindowId = t.Str("sourceWindowId");
    tr.destinationWindowId = t.Str("destinationWindowId");
    tr.inputId = t.Str("inputId");
    tr.runtimeCreated = t.BoolOr("runtimeCreated", false);
    e.windowTransitions.push_back(std::move(tr));
  }
  return e;
}

Dstg DstgFrom(const Node& n) {
  n.ExpectObject();
  Dstg d;
  for (const Node& s : n.ItemsOr("abstractStates")) {
    AbstractState st;
    st.id = s.Str("id");
    st.windowId = s.Str("windowId");
    st.abstractionLevel = ParseAbstractionLevel(s.StrOr("abstractionLevel",
                                                        "L1"));
    st.obsolete = s.BoolOr("obsolete", false);
    st.observedInVersions = s.StrSet("observedInVersions");
    for (const Node& a : s.ItemsOr("avms")) {
      Avm avm;
      avm.id = a.Str("id");
      avm.ewtgWidgetId = a.OptStr("ewtgWidgetId");
      avm.valuations = ValuationsFrom(a.At("valuations"));
      avm.cardinality = a.Has("cardinality")
                            ? static_cast<int>(a.At("cardinality").Int())
                            : 1;
      st.avms.push_back(std::move(avm));
    }
    d.abstractStates.push_back(std::move(st));
  }
  for (const Node& t : n.ItemsOr("abstractTransitions")) {
    AbstractTransition tr;
    tr.id = t.Str("id");
    tr.sourceStateId = t.Str("sourceStateId");
    tr.sourceAvmId = t.OptStr("sourceAvmId");
    tr.actionType = ParseActionType(t.Str("actionType"));
    tr.dataPayload = t.OptStr("dataPayload");
    tr.destinationStateId = t.Str("destinationStateId");
    if (t.Has("layoutGuard")) tr.layoutGuard = FingerprintFrom(t.At("layoutGuard"));
    tr.provenanceVersion = t.StrOr("provenanceVersion", "");
    tr.windowTransitionId = t.OptStr("windowTransitionId");
    tr.inputId = t.OptStr("inputId");
    d.abstractTransitions.push_back(std::move(tr));
  }
  if (n.Has("abstractionPolicy")) {
    Node p = n.At("abstractionPolicy");
    p.ExpectObject();
    for (const auto& [win, level] : p.value().items()) {
      d.abstractionPolicy[win] =
          ParseAbstractionLevel(Node(level, p.path() + "/" + win).Str());
    }
  }
  d.initialStateIds = n.StrSet("initialStateIds");
  return d;
}

Gstg GstgFrom(const Node& n) {
  n.ExpectObject();
  Gstg g;
  for (const Node& t : n.ItemsOr("guiTrees")) g.guiTrees.push_back(GuiTreeFrom(t));
  for (const Node& s : n.ItemsOr("actions")) {
    TraceStep step;
    step.sourceTreeId = s.Str("sourceTreeId");
    step.action = ActionFrom(s.At("action"));
    step.destinationTreeId = s.Str("destinationTreeId");
    g.actions.push_back(std::move(step));
  }
  return g;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(JoinViolations(violations)),
      violations_(std::move(violations)) {}

// --- Writing ---------------------------------------------------------------

json ToJson(const Valuations& valuations) {
  json out = json::object();
  for (const auto& [key, value] : valuations) {
    if (std::holds_alternative<bool>(value)) {
      out[key] = std::get<bool>(value);
    } else {
      out[key] = std::get<std::string>(value);
    }
  }
  return out;
}

json ToJson(const LayoutFingerprint& fingerprint) {
  json out = json::array();
  for (const auto& [valuations, count] : fingerprint) {
    out.push_back({{"valuations", ToJson(valuations)}, {"count", count}});
  }
  return out;
}

json ToJson(const GuiNode& node) {
  json props = {{"resourceId", node.resourceId},
                {"className", node.className},
                {"contentDescription", node.contentDescription},
                {"text", node.text},
                {"password", node.password},
                {"clickable", node.clickable},
                {"longClickable", node.longClickable},
                {"scrollable", node.scrollable},
                {"checked", node.checked},
                {"enabled", node.enabled},
                {"selected", node.selected},
                {"isInputField", node.isInputField},
                {"hasChildren", node.hasChildren}};
  json out = {{"properties", props}, {"children", json::array()}};
  for (const auto& c : node.children) out["children"].push_back(ToJson(c));
  if (node.boundsHint) {
    out["boundsHint"] = {{"x", node.boundsHint->x},
                         {"y", node.boundsHint->y},
                         {"width", node.boundsHint->width},
                         {"height", node.boundsHint->height}};
  }
  return out;
}

json ToJson(const GuiTree& tree) {
  return {{"id", tree.id},
          {"windowId", tree.windowId},
          {"root", ToJson(tree.root)},
          {"abstractStateId", tree.abstractStateId},
          {"sessionIndex", tree.sessionIndex}};
}

json ToJson(const Action& action) {
  return {{"inputId", OptJson(action.inputId)},
          {"actionType", ToString(action.actionType)},
          {"concreteNodePath", OptJson(action.concreteNodePath)},
          {"dataPayload", OptJson(action.dataPayload)},
          {"cost", action.cost()}};
}

json ToJson(const Ewtg& e) {
  json out = {{"windows", json::array()},
              {"widgets", json::array()},
              {"inputs", json::array()},
              {"windowTransitions", json::array()}};
  for (const auto& w : e.windows) {
    out["windows"].push_back({{"id", w.id},
                              {"name", w.name},
                              {"kind", ToString(w.kind)},
                              {"className", w.className},
                              {"runtimeCreated", w.runtimeCreated},
                              {"widgetIds", w.widgetIds}});
  }
  for (const auto& w : e.widgets) {
    out["widgets"].push_back({{"id", w.id},
                              {"windowId", w.windowId},
                              {"className", w.className},
                              {"resourceId", w.resourceId},
                              {"contentDescription", w.contentDescription},
                              {"xpath", w.xpath},
                              {"parentId", OptJson(w.parentId)},
                              {"runtimeCreated", w.runtimeCreated}});
  }
  for (const auto& i : e.inputs) {
    out["inputs"].push_back({{"id", i.id},
                             {"windowId", i.windowId},
                             {"widgetId", OptJson(i.widgetId)},
                             {"actionType", ToString(i.actionType)},
                             {"handlerMethodIds", i.handlerMethodIds},
                             {"runtimeCreated", i.runtimeCreated}});
  }
  for (const auto& t : e.windowTransitions) {
    out["windowTransitions"].push_back(
        {{"id", t.id},
         {"sourceWindowId", t.sourceWindowId},
         {"destinationWindowId", t.destinationWindowId},
         {"inputId", t.inputId},
         {"runtimeCreated", t.runtimeCreated}});
  }
  return out;
}

json ToJson(const AppModel& m) {
  json dstg = {{"abstractStates", json::array()},
               {"abstractTransitions", json::array()},
               {"abstractionPolicy", json::object()},
               {"initialStateIds", m.dstg.initialStateIds}};
  for (const auto& s : m.dstg.abstractStates) {
    json avms = json::array();
    for (const auto& a : s.avms) {
      avms.push_back({{"id", a.id},
                      {"ewtgWidgetId", OptJson(a.ewtgWidgetId)},
                      {"valuations", ToJson(a.valuations)},
                      {"cardinality", a.cardinality}});
    }
    dstg["abstractStates"].push_back(
        {{"id", s.id},
         {"windowId", s.windowId},
         {"avms", avms},
         {"abstractionLevel", ToString(s.abstractionLevel)},
         {"obsolete", s.obsolete},
         {"observedInVersions", s.observedInVersions}});
  }
  for (const auto& t : m.dstg.abstractTransitions) {
    dstg["abstractTransitions"].push_back(
        {{"id", t.id},
         {"sourceStateId", t.sourceStateId},
         {"sourceAvmId", OptJson(t.sourceAvmId)},
         {"actionType", ToString(t.actionType)},
         {"dataPayload", OptJson(t.dataPayload)},
         {"destinationStateId", t.destinationStateId},
         {"layoutGuard",
          t.layoutGuard ? ToJson(*t.layoutGuard) : json(nullptr)},
         {"provenanceVersion", t.provenanceVersion},
         {"windowTransitionId", OptJson(t.windowTransitionId)},
         {"inputId", OptJson(t.inputId)}});
  }
  for (const auto& [win, level] : m.dstg.abstractionPolicy) {
    dstg["abstractionPolicy"][win] = ToString(level);
  }
  json gstg = {{"guiTrees", json::array()}, {"actions", json::array()}};
  for (const auto& t : m.gstg.guiTrees) gstg["guiTrees"].push_back(ToJson(t));
  for (const auto& s : m.gstg.actions) {
    gstg["actions"].push_back({{"sourceTreeId", s.sourceTreeId},
                               {"action", ToJson(s.action)},
                               {"destinationTreeId", s.destinationTreeId}});
  }
  json out = {{"schema_version", kSchemaVersion},
              {"version", m.version},
              {"ewtg", ToJson(m.ewtg)},
              {"dstg", dstg},
              {"gstg", gstg}};
  if (m.adaptation) {
    out["adaptation"] = {
        {"baseVersion", m.adaptation->baseVersion},
        {"addedOrReplacedWidgetIds", m.adaptation->addedOrReplacedWidgetIds}};
  }
  return out;
}

// --- Reading ---------------------------------------------------------------

AppModel ModelFromJson(const json& doc) {
  return Wrap([&] {
    Node root(doc, "");
    root.ExpectObject();
    if (!root.Has("schema_version")) root.Fail("missing key 'schema_version'");
    long long schema = root.At("schema_version").Int();
    if (schema != kSchemaVersion) {
      throw VersionError("unsupported schema_version " +
                         std::to_string(schema) + " (expected " +
                         std::to_string(kSchemaVersion) + ")");
    }
    AppModel m;
    m.version = root.Str("version");
    m.ewtg = EwtgFrom(root.At("ewtg"));
    if (root.Has("dstg")) m.dstg = DstgFrom(root.At("dstg"));
    if (root.Has("gstg")) m.gstg = GstgFrom(root.At("gstg"));
    if (root.Has("adaptation")) {
      Node a = root.At("adaptation");
      m.adaptation = AdaptationInfo{a.StrOr("baseVersion", ""),
                                    a.StrSet("addedOrReplacedWidgetIds")};
    }
    return m;
  });
}

Ewtg EwtgFromJson(const json& doc) {
  return Wrap([&] { return EwtgFrom(Node(doc, "")); });
}
GuiNode GuiNodeFromJson(const json& doc) {
  return Wrap([&] { return GuiNodeFrom(Node(doc, "")); });
}
GuiTree GuiTreeFromJson(const json& doc) {
  return Wrap([&] { return GuiTreeFrom(Node(doc, "")); });
}
Action ActionFromJson(const json& doc) {
  return Wrap([&] { return ActionFrom(Node(doc, "")); });
}

json ParseJsonText(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed document at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

std::string SerializeModel(const AppModel& model) {
  std::vector<std::string> violations = ValidateIntegrity(model);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return ToJson(model).dump(1) + "\n";
}

AppModel DeserializeModel(std::string_view text) {
  AppModel m = ModelFromJson(ParseJsonText(text));
  std::vector<std::string> violations = ValidateIntegrity(m);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return m;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

AppModel LoadModel(const std::filesystem::path& path) {
  return DeserializeModel(ReadFile(path));
}

void SaveModel(const AppModel& model, const std::filesystem::path& path) {
  WriteFile(path, SerializeModel(model));
}

}  // namespace carryover
