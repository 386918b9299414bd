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

#include "carryover/report.h"

#include "carryover/model_io.h"

namespace carryover {

using nlohmann::json;

json ToJson(const InstructionSet& set) {
  json out = json::object();
  for (const auto& [m, lines] : set) out[m] = lines;
  return out;
}

InstructionSet InstructionSetFromJson(const json& doc) {
  InstructionSet out;
  for (const auto& [m, lines] : doc.items()) {
    out[m] = lines.get<std::set<int>>();
  }
  return out;
}

json EmitReport(const SessionResult& session) {
  const CoverageLedger& ledger = session.ledger;
  json summary;
  summary["targetMethods"] = ledger.targets().methodIds.size();
  summary["coveredTargetMethods"] = ledger.CoveredMethods();
  summary["targetMethodCoverage"] = ledger.MethodCoverage();
  summary["targetInstructions"] = ledger.targets().TotalInstructions();
  summary["coveredTargetInstructions"] = ledger.CoveredInstructions();
  summary["targetInstructionCoverage"] = ledger.InstructionCoverage();
  summary["executedActions"] = session.executedActions;
  summary["utaCount"] = session.utas.size();
  summary["actionsToFirstTargetCoverage"] =
      session.actionsToFirstTargetCoverage
          ? json(*session.actionsToFirstTargetCoverage)
          : json(nullptr);
  summary["aborted"] = session.aborted;

  json utas = json::array();
  for (const auto& u : session.utas) {
    utas.push_back({{"actionIndex", u.actionIndex},
                    {"beforeTree", ToJson(u.beforeTree)},
                    {"action", ToJson(u.action)},
                    {"afterTree", ToJson(u.afterTree)},
                    {"newlyCovered", ToJson(u.newlyCovered)},
                    {"newlyCoveredInstructionCount",
                     u.newlyCoveredInstructionCount}});
  }
  json targets = json::object();
  for (const auto& m : ledger.targets().methodIds) {
    auto it = ledger.targets().instructionCounts.find(m);
    targets[m] = it == ledger.targets().instructionCounts.end() ? 0
                                                                : it->second;
  }
  json actions = json::array();
  for (size_t i = 0; i < ledger.executed().size(); ++i) {
    actions.push_back({{"action", i}, {"executed", ToJson(ledger.executed()[i])}});
  }
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["version"] = session.model.version;
  doc["summary"] = std::move(summary);
  doc["utas"] = std::move(utas);
  doc["targets"] = std::move(targets);
  doc["ledger"] = std::move(actions);
  if (session.aborted) doc["abortReason"] = session.abortReason;
  return doc;
}

json EmitReport(const SessionResult& session,
                const std::filesystem::path& out) {
  json doc = EmitReport(session);
  WriteFile(out, doc.dump(1) + "\n");
  return doc;
}

namespace {

const json& Summary(const json& report, const char* name) {
  if (!report.is_object() || report.value("schema_version", -1) !=
                                 kReportSchemaVersion) {
    throw ReportError(std::string(name) + " is not a report of schema " +
                      std::to_string(kReportSchemaVersion));
  }
  if (!report.contains("summary") || !report["summary"].is_object()) {
    throw ReportError(std::string(name) + " has no summary");
  }
  return report["summary"];
}

}  // namespace

json CompareRuns(const json& a, const json& b) {
  const json& sa = Summary(a, "first report");
  const json& sb = Summary(b, "second report");
  json delta;
  for (const char* key : {"targetMethodCoverage", "targetInstructionCoverage",
                          "coveredTargetMethods", "coveredTargetInstructions",
                          "utaCount", "executedActions"}) {
    if (!sa.contains(key) || !sb.contains(key)) {
      throw ReportError(std::string("summary lacks '") + key + "'");
    }
    if (sa[key].is_number_integer() && sb[key].is_number_integer()) {
      delta[key] = sb[key].get<long long>() - sa[key].get<long long>();
    } else {
      delta[key] = sb[key].get<double>() - sa[key].get<double>();
    }
  }
  const json& fa = sa.value("actionsToFirstTargetCoverage", json(nullptr));
  const json& fb = sb.value("actionsToFirstTargetCoverage", json(nullptr));
  delta["actionsToFirstTargetCoverage"] =
      fa.is_number() && fb.is_number()
          ? json(fb.get<long long>() - fa.get<long long>())
          : json(nullptr);
  return {{"a", sa}, {"b", sb}, {"delta", delta}};
}

}  // namespace carryover
