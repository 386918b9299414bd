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

// The four steps chained across the versions of a simulated app:
// export the EWTG, diff it against the previous version, adapt the
// previous model, test, then prune and replay.

#ifndef CARRYOVER_PIPELINE_H_
#define CARRYOVER_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "carryover/diff.h"
#include "carryover/engine.h"
#include "carryover/harness.h"
#include "carryover/offline.h"

namespace carryover {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  int budget = 200;
  unsigned long long seed = 0;
  DiffConfig diff;
  // Budget, seed, related windows and text values are filled per version.
  EngineConfig engine;
  // When false every version is tested from its exported EWTG alone.
  bool reuse = true;
  std::optional<VersionTag> fromVersion;
  std::optional<VersionTag> toVersion;
};

// Applies the keys present in `doc`; unknown keys raise ConfigError.
void ApplyConfig(const nlohmann::json& doc, PipelineConfig& config);
PipelineConfig LoadConfig(const std::filesystem::path& path);

TargetSet TargetsFor(const AppSpec& spec, size_t version);
EngineConfig EngineConfigFor(const AppSpec& spec, size_t version,
                             const PipelineConfig& config);

// Runs one session of `version` on a fresh simulated driver.
SessionResult TestVersion(const AppModel& model, const AppSpec& spec,
                          size_t version, const TargetSet& targets,
                          const PipelineConfig& config);

// Prunes unvisited states, then replays the trace on a fresh driver.
ReplayResult RefineVersion(const AppModel& model, const AppSpec& spec,
                           size_t version, const PipelineConfig& config);

struct VersionRun {
  VersionTag version;
  std::filesystem::path ewtgPath;
  std::optional<std::filesystem::path> diffPath;
  std::filesystem::path modelPath;
  std::filesystem::path reportPath;
  nlohmann::json report;
  SessionResult session;
  ReplayResult replay;
};

// Writes ewtg_<v>.json, diff_<v>.json (after the first version),
// model_<v>.json and report_<v>.json into `workdir`, which must exist.
std::vector<VersionRun> RunPipeline(const AppSpec& spec,
                                    const PipelineConfig& config,
                                    const std::filesystem::path& workdir);

}  // namespace carryover

#endif  // CARRYOVER_PIPELINE_H_
