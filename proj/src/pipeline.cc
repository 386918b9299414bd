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

#include "carryover/pipeline.h"

#include "carryover/adaptation.h"
#include "carryover/model_io.h"
#include "carryover/report.h"

namespace carryover {

using nlohmann::json;

namespace {

unsigned long long SessionSeed(unsigned long long seed, size_t version) {
  return seed * 1000003ULL + version;
}

template <typename T>
T Get(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void ApplyConfig(const json& doc, PipelineConfig& c) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "budget") {
      c.budget = Get<int>(doc, key);
    } else if (key == "seed") {
      c.seed = Get<unsigned long long>(doc, key);
    } else if (key == "levenshteinThreshold") {
      c.diff.levenshteinThreshold = Get<double>(doc, key);
    } else if (key == "xpathThreshold") {
      c.diff.xpathThreshold = Get<double>(doc, key);
    } else if (key == "layoutThreshold") {
      c.engine.planner.layoutThreshold = Get<double>(doc, key);
    } else if (key == "defaultProbability") {
      c.engine.planner.defaultProbability = Get<double>(doc, key);
    } else if (key == "maxFullCost") {
      c.engine.planner.maxFullCost = Get<double>(doc, key);
    } else if (key == "phaseCaps") {
      auto caps = Get<std::vector<double>>(doc, key);
      if (caps.size() != 3) throw ConfigError("phaseCaps needs three values");
      for (double x : caps) {
        if (x < 0) throw ConfigError("phaseCaps must be non-negative");
      }
      c.engine.phaseCaps = {caps[0], caps[1], caps[2]};
    } else if (key == "repetitionCap") {
      c.engine.repetitionCap = Get<int>(doc, key);
    } else if (key == "randomSlice") {
      c.engine.randomSlice = Get<int>(doc, key);
    } else if (key == "minWidgetSide") {
      c.engine.minWidgetSide = Get<int>(doc, key);
    } else if (key == "textDictionary") {
      c.engine.textDictionary = Get<std::vector<std::string>>(doc, key);
    } else if (key == "reuse") {
      c.reuse = Get<bool>(doc, key);
    } else if (key == "from") {
      c.fromVersion = Get<std::string>(doc, key);
    } else if (key == "to") {
      c.toVersion = Get<std::string>(doc, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  PipelineConfig c;
  ApplyConfig(ParseJsonText(ReadFile(path)), c);
  return c;
}

TargetSet TargetsFor(const AppSpec& spec, size_t version) {
  TargetManifest m = DiffTargets(spec, version);
  TargetSet t;
  t.methodIds = m.updatedMethodIds;
  for (const auto& id : m.updatedMethodIds) {
    t.instructionCounts[id] = m.instructionCounts.at(id);
  }
  return t;
}

EngineConfig EngineConfigFor(const AppSpec& spec, size_t version,
                             const PipelineConfig& config) {
  EngineConfig e = config.engine;
  e.budget = config.budget;
  e.seed = SessionSeed(config.seed, version);
  const VersionSpec& v = spec.versions.at(version);
  e.relatedWindows = v.relatedWindows;
  e.textValues = v.textValues;
  return e;
}

SessionResult TestVersion(const AppModel& model, const AppSpec& spec,
                          size_t version, const TargetSet& targets,
                          const PipelineConfig& config) {
  SimDriver driver(spec, version, config.seed,
                   2 * static_cast<long long>(version));
  return RunSession(model, targets, driver,
                    EngineConfigFor(spec, version, config));
}

ReplayResult RefineVersion(const AppModel& model, const AppSpec& spec,
                           size_t version, const PipelineConfig& config) {
  SimDriver driver(spec, version, config.seed,
                   2 * static_cast<long long>(version) + 1);
  return ReplayFlagObsolete(PruneUnvisited(model), driver);
}

std::vector<VersionRun> RunPipeline(const AppSpec& spec,
                                    const PipelineConfig& config,
                                    const std::filesystem::path& workdir) {
  if (!std::filesystem::is_directory(workdir)) {
    throw PipelineError("workdir '" + workdir.string() + "' does not exist");
  }
  const size_t from = config.fromVersion ? spec.IndexOf(*config.fromVersion) : 0;
  const size_t to = config.toVersion ? spec.IndexOf(*config.toVersion)
                                     : spec.versions.size() - 1;
  if (to < from) throw PipelineError("toVersion precedes fromVersion");

  std::vector<VersionRun> runs;
  std::optional<AppModel> previous;
  for (size_t k = from; k <= to; ++k) {
    VersionRun run;
    run.version = spec.versions[k].version;
    const std::string tag = run.version;
    Ewtg ewtg = ExportEwtg(spec, k);
    run.ewtgPath = workdir / ("ewtg_" + tag + ".json");
    WriteFile(run.ewtgPath, ToJson(ewtg).dump(1) + "\n");

    AppModel model;
    if (previous) {
      DiffResult diff = DiffEwtgs(previous->ewtg, ewtg, config.diff);
      run.diffPath = workdir / ("diff_" + tag + ".json");
      WriteFile(*run.diffPath, ToJson(diff).dump(1) + "\n");
      model = config.reuse ? AdaptModel(*previous, ewtg, diff, tag)
                           : ExportModel(spec, k);
    } else {
      model = ExportModel(spec, k);
    }

    run.session = TestVersion(model, spec, k, TargetsFor(spec, k), config);
    run.reportPath = workdir / ("report_" + tag + ".json");
    run.report = EmitReport(run.session, run.reportPath);
    run.modelPath = workdir / ("model_" + tag + ".json");
    if (run.session.aborted) {
      SaveModel(run.session.model, run.modelPath);
      throw PipelineError("session of " + tag +
                          " aborted: " + run.session.abortReason);
    }
    run.replay = RefineVersion(run.session.model, spec, k, config);
    SaveModel(run.replay.model, run.modelPath);
    previous = run.replay.model;
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace carryover
