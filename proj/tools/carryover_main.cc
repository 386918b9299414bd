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

// Command-line front end: each step on its own, or the whole pipeline.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "carryover/adaptation.h"
#include "carryover/diff.h"
#include "carryover/harness.h"
#include "carryover/model_io.h"
#include "carryover/pipeline.h"
#include "carryover/planner.h"
#include "carryover/report.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace carryover {
namespace {

struct Globals {
  std::optional<unsigned long long> seed;
  std::string config;
  std::string workdir;
};

fs::path Resolve(const Globals& g, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !g.workdir.empty()) return fs::path(g.workdir) / p;
  return p;
}

PipelineConfig BaseConfig(const Globals& g) {
  PipelineConfig c;
  if (!g.config.empty()) c = LoadConfig(g.config);
  if (g.seed) c.seed = *g.seed;
  return c;
}

void Emit(const Globals& g, const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    WriteFile(Resolve(g, out), text);
  }
}

// Either a model document or a bare EWTG document.
Ewtg LoadEwtgLike(const Globals& g, const std::string& path,
                  std::optional<VersionTag>* version = nullptr) {
  json doc = ParseJsonText(ReadFile(Resolve(g, path)));
  if (doc.contains("ewtg")) {
    AppModel m = ModelFromJson(doc);
    if (version != nullptr) *version = m.version;
    return m.ewtg;
  }
  return EwtgFromJson(doc);
}

json ToJson(const TargetManifest& m) {
  return {{"updatedMethodIds", m.updatedMethodIds},
          {"instructionCounts", m.instructionCounts}};
}

TargetSet TargetsFromJson(const json& doc) {
  TargetSet t;
  t.methodIds = doc.at("updatedMethodIds").get<std::set<MethodId>>();
  auto counts = doc.at("instructionCounts").get<std::map<MethodId, int>>();
  for (const auto& m : t.methodIds) {
    auto it = counts.find(m);
    if (it == counts.end()) {
      throw ConfigError("targets file lacks the instruction count of " + m);
    }
    t.instructionCounts[m] = it->second;
  }
  return t;
}

int Main(int argc, char** argv) {
  CLI::App app{"Update-aware model-based GUI test generation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for sessions and generated content");
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--workdir", g.workdir,
                 "Directory for artifacts and relative paths");

  // diff
  auto* diff = app.add_subcommand("diff", "Diff the EWTGs of two models");
  std::string diff_base, diff_updated, diff_out;
  std::optional<double> lev, xpath;
  diff->add_option("base", diff_base, "Base model or EWTG")->required();
  diff->add_option("updated", diff_updated, "Updated model or EWTG")
      ->required();
  diff->add_option("--out", diff_out, "Output diff document");
  diff->add_option("--levenshtein-threshold", lev);
  diff->add_option("--xpath-threshold", xpath);

  // adapt
  auto* adapt = app.add_subcommand("adapt", "Carry a model to a new version");
  std::string adapt_base, adapt_ewtg, adapt_diff, adapt_out, adapt_version;
  adapt->add_option("base", adapt_base, "Base model")->required();
  adapt->add_option("updated", adapt_ewtg, "Updated EWTG or model")
      ->required();
  adapt->add_option("diff", adapt_diff, "Diff document")->required();
  adapt->add_option("--out", adapt_out, "Output model")->required();
  adapt->add_option("--version", adapt_version, "Updated version tag");

  // test
  auto* test = app.add_subcommand("test", "Run one test session");
  std::string test_model, test_spec, test_version, test_targets = "auto",
                                                   test_out_model, test_report;
  std::optional<int> test_budget;
  test->add_option("model", test_model, "Model adapted to the version")
      ->required();
  test->add_option("appspec", test_spec, "AppSpec document")->required();
  test->add_option("--version", test_version, "Version under test")
      ->required();
  test->add_option("--targets", test_targets, "auto, or a targets file");
  test->add_option("--budget", test_budget, "Action budget");
  test->add_option("--out-model", test_out_model, "Output model");
  test->add_option("--report", test_report, "Output report");

  // refine
  auto* refine = app.add_subcommand("refine", "Prune and replay a session");
  std::string refine_model, refine_spec, refine_version, refine_out;
  refine->add_option("model", refine_model, "Model after a session")
      ->required();
  refine->add_option("appspec", refine_spec, "AppSpec document")->required();
  refine->add_option("--version", refine_version, "Version of the session")
      ->required();
  refine->add_option("--out", refine_out, "Output model")->required();

  // plan
  auto* plan = app.add_subcommand("plan", "Print the cheapest sequence");
  std::string plan_model, plan_from, plan_window, plan_state, plan_input;
  plan->add_option("model", plan_model, "Model")->required();
  plan->add_option("--from", plan_from, "Current state (default: initial)");
  auto* tw = plan->add_option("--to-window", plan_window);
  auto* ts = plan->add_option("--to-state", plan_state);
  auto* ti = plan->add_option("--to-input", plan_input);
  tw->excludes(ts)->excludes(ti);
  ts->excludes(ti);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run all steps");
  std::string pipe_spec, pipe_from, pipe_to;
  std::optional<int> pipe_budget;
  bool pipe_cold = false;
  pipeline->add_option("appspec", pipe_spec, "AppSpec document")->required();
  pipeline->add_option("--from", pipe_from, "First version");
  pipeline->add_option("--to", pipe_to, "Last version");
  pipeline->add_option("--budget", pipe_budget, "Action budget per version");
  pipeline->add_flag("--no-reuse", pipe_cold,
                     "Test every version from its EWTG alone");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two reports");
  std::string cmp_a, cmp_b, cmp_out;
  compare->add_option("a", cmp_a, "First report")->required();
  compare->add_option("b", cmp_b, "Second report")->required();
  compare->add_option("--out", cmp_out, "Output comparison");

  // harness
  auto* harness = app.add_subcommand("harness", "Simulated app utilities");
  harness->require_subcommand(1);
  harness->fallthrough();
  auto* export_ewtg = harness->add_subcommand("export-ewtg", "Export a model");
  std::string ex_spec, ex_version, ex_out;
  export_ewtg->add_option("appspec", ex_spec)->required();
  export_ewtg->add_option("--version", ex_version)->required();
  export_ewtg->add_option("--out", ex_out);
  auto* diff_targets =
      harness->add_subcommand("diff-targets", "Updated methods of a version");
  std::string dt_spec, dt_version, dt_out;
  diff_targets->add_option("appspec", dt_spec)->required();
  diff_targets->add_option("--version", dt_version)->required();
  diff_targets->add_option("--out", dt_out);

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig config = BaseConfig(g);
    if (diff->parsed()) {
      if (lev) config.diff.levenshteinThreshold = *lev;
      if (xpath) config.diff.xpathThreshold = *xpath;
      DiffResult d = DiffEwtgs(LoadEwtgLike(g, diff_base),
                               LoadEwtgLike(g, diff_updated), config.diff);
      Emit(g, diff_out, ToJson(d).dump(1) + "\n");
    } else if (adapt->parsed()) {
      AppModel base = LoadModel(Resolve(g, adapt_base));
      std::optional<VersionTag> tag;
      Ewtg updated = LoadEwtgLike(g, adapt_ewtg, &tag);
      if (!adapt_version.empty()) tag = adapt_version;
      if (!tag) {
        std::cerr << "adapt: --version is required with a bare EWTG\n";
        return 1;
      }
      DiffResult d = DiffFromJson(ParseJsonText(ReadFile(Resolve(g, adapt_diff))));
      SaveModel(AdaptModel(base, updated, d, *tag), Resolve(g, adapt_out));
    } else if (test->parsed()) {
      if (test_budget) config.budget = *test_budget;
      AppModel model = LoadModel(Resolve(g, test_model));
      AppSpec spec = LoadSpec(Resolve(g, test_spec));
      size_t k = spec.IndexOf(test_version);
      TargetSet targets =
          test_targets == "auto"
              ? TargetsFor(spec, k)
              : TargetsFromJson(ParseJsonText(ReadFile(Resolve(g, test_targets))));
      SessionResult r = TestVersion(model, spec, k, targets, config);
      json report = EmitReport(r);
      Emit(g, test_report, report.dump(1) + "\n");
      if (!test_out_model.empty()) SaveModel(r.model, Resolve(g, test_out_model));
      if (r.aborted) {
        std::cerr << "session aborted: " << r.abortReason << "\n";
        return 2;
      }
    } else if (refine->parsed()) {
      AppModel model = LoadModel(Resolve(g, refine_model));
      AppSpec spec = LoadSpec(Resolve(g, refine_spec));
      ReplayResult r =
          RefineVersion(model, spec, spec.IndexOf(refine_version), config);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      SaveModel(r.model, Resolve(g, refine_out));
      std::cout << "flagged " << r.flagged.size() << " obsolete state(s)\n";
    } else if (plan->parsed()) {
      AppModel model = LoadModel(Resolve(g, plan_model));
      StateId from = plan_from;
      if (from.empty()) {
        if (model.dstg.initialStateIds.empty()) {
          std::cerr << "plan: the model has no initial state; use --from\n";
          return 1;
        }
        from = *model.dstg.initialStateIds.begin();
      }
      const AbstractState* s = model.dstg.FindState(from);
      if (s == nullptr) {
        std::cerr << "plan: unknown state " << from << "\n";
        return 1;
      }
      PlanTarget target;
      if (!plan_window.empty()) {
        target = WindowTarget{plan_window};
      } else if (!plan_state.empty()) {
        target = StateTarget{plan_state};
      } else if (!plan_input.empty()) {
        target = InputTarget{plan_input};
      } else {
        std::cerr << "plan: give --to-window, --to-state or --to-input\n";
        return 1;
      }
      auto seq = PlanToTarget(model, from, target, {LayoutOf(*s)},
                              config.engine.planner);
      if (!seq) {
        std::cout << "no path\n";
        return 3;
      }
      std::cout << Describe(*seq);
    } else if (pipeline->parsed()) {
      if (pipe_budget) config.budget = *pipe_budget;
      if (!pipe_from.empty()) config.fromVersion = pipe_from;
      if (!pipe_to.empty()) config.toVersion = pipe_to;
      if (pipe_cold) config.reuse = false;
      AppSpec spec = LoadSpec(pipe_spec);
      auto runs = RunPipeline(spec, config, g.workdir.empty() ? "." : g.workdir);
      for (const auto& r : runs) {
        const json& s = r.report["summary"];
        std::cout << r.version << ": actions " << s["executedActions"]
                  << ", UTAs " << s["utaCount"] << ", target methods "
                  << s["targetMethodCoverage"] << "%, target instructions "
                  << s["targetInstructionCoverage"] << "%\n";
      }
    } else if (compare->parsed()) {
      json a = ParseJsonText(ReadFile(Resolve(g, cmp_a)));
      json b = ParseJsonText(ReadFile(Resolve(g, cmp_b)));
      Emit(g, cmp_out, CompareRuns(a, b).dump(1) + "\n");
    } else if (export_ewtg->parsed()) {
      AppSpec spec = LoadSpec(Resolve(g, ex_spec));
      Emit(g, ex_out, SerializeModel(ExportModel(spec, spec.IndexOf(ex_version))));
    } else if (diff_targets->parsed()) {
      AppSpec spec = LoadSpec(Resolve(g, dt_spec));
      Emit(g, dt_out,
           ToJson(DiffTargets(spec, spec.IndexOf(dt_version))).dump(1) + "\n");
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace carryover

int main(int argc, char** argv) { return carryover::Main(argc, argv); }
