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

// Session reports: one entry per unique target action plus a coverage
// summary and the raw per-action ledger.

#ifndef CARRYOVER_REPORT_H_
#define CARRYOVER_REPORT_H_

#include <filesystem>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "carryover/engine.h"

namespace carryover {

inline constexpr int kReportSchemaVersion = 1;

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json ToJson(const InstructionSet& set);
InstructionSet InstructionSetFromJson(const nlohmann::json& doc);

nlohmann::json EmitReport(const SessionResult& session);
// Writes the report; throws std::runtime_error on I/O failure.
nlohmann::json EmitReport(const SessionResult& session,
                          const std::filesystem::path& out);

// Side-by-side summaries and b - a deltas. Throws ReportError when either
// document is not a report of the supported schema.
nlohmann::json CompareRuns(const nlohmann::json& a, const nlohmann::json& b);

}  // namespace carryover

#endif  // CARRYOVER_REPORT_H_
