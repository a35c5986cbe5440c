// Copyright 2026 The CrashScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crashscope/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "crashscope/schema.hpp"

namespace crashscope {

namespace fs = std::filesystem;

namespace {

Json readJsonFile(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError(p.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(p.string(), std::string("invalid JSON: ") + e.what());
  }
}

std::string joinPath(const std::string& prefix, const std::string& path) {
  if (path.empty() || path == "(root)") return prefix;
  return prefix + "." + path;
}

template <typename F>
auto prefixed(const std::string& prefix, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(joinPath(prefix, e.path()), e.message());
  } catch (const SchemaError& e) {
    throw ValidationError(joinPath(prefix, e.path()), e.issues().front().message);
  }
}

}  // namespace

LoadedApp loadApp(const Json& model, const Json& ir) {
  LoadedApp app;
  app.model = std::make_shared<const AppModel>(
      prefixed("app_model", [&] { return appModelFromJson(model); }));
  app.ir = prefixed("app_ir", [&] { return appIRFromJson(ir); });
  app.features = extractFeatureMap(app.ir);
  app.model_json = model;
  app.ir_json = ir;
  app.warnings = app.model->warnings;

  if (app.ir.package != app.model->app.package) {
    app.warnings.push_back("IR package '" + app.ir.package + "' differs from app package '" +
                           app.model->app.package + "'");
  }
  for (const auto& a : app.model->activities) {
    if (!app.features.activities.count(a.name)) {
      app.warnings.push_back("activity '" + a.name + "' missing from the IR manifest");
    } else if (a.rotatable != (app.features.rotatable.count(a.name) > 0)) {
      app.warnings.push_back("activity '" + a.name +
                             "' rotatable flag differs between model and IR manifest");
    }
  }
  return app;
}

LoadedApp loadAppFiles(const fs::path& model, const fs::path& ir) {
  return loadApp(readJsonFile(model), readJsonFile(ir));
}

DeviceFactoryFor simulatorSessions(std::shared_ptr<const AppModel> model) {
  return [model](const StrategyConfig& s) {
    SessionOptions opts;
    opts.pid = 1000 + static_cast<int>(s.seed % 30000);
    return simulatorFactory(model, opts);
  };
}

std::vector<StrategyRun> exploreMatrix(const LoadedApp& app, const ExploreRequest& req,
                                       const StrategyDone& on_done) {
  ExploreOptions opts;
  opts.budget = req.budget;
  opts.task_id = req.task_id;
  if (!req.task_id.empty()) opts.id_prefix = req.task_id + ".";
  return runMatrix(simulatorSessions(app.model), app.model->app, app.features,
                   req.strategies, req.base_seed, req.workers, opts, on_done);
}

std::vector<CrashArtifacts> deriveArtifacts(const StrategyRun& run) {
  std::vector<CrashArtifacts> out;
  const auto& shots = run.result.screenshots;
  ScreenshotLookup lookup = [&shots](const std::string& ref) -> std::optional<std::string> {
    auto it = shots.find(ref);
    if (it == shots.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& crash : run.result.crashes) {
    auto trace = std::find_if(run.result.traces.begin(), run.result.traces.end(),
                              [&](const ExecutionTrace& t) { return t.trace_id == crash.trace_id; });
    if (trace == run.result.traces.end()) {
      throw ContractViolation("crash " + crash.crash_id + " has no trace");
    }
    CrashArtifacts a;
    a.crash = crash;
    a.report = generateReport(crash, *trace, lookup);
    a.html = renderHtml(a.report);
    a.script = generateScript(*trace, crash);
    a.script_text = serializeScript(a.script);
    out.push_back(std::move(a));
  }
  return out;
}

void persistRun(Store& store, const StrategyRun& run, const std::string& task_id) {
  const ExplorationResult& r = run.result;
  for (const auto& [ref, svg] : r.screenshots) {
    store.putText(Collection::Screenshots, ref, "svg", svg, task_id);
  }
  for (const auto& t : r.traces) store.putDocument(Collection::Traces, t.trace_id, t);

  std::string app_id;
  if (!r.traces.empty()) app_id = r.traces.front().app_id;
  Json graph = r.graph;
  graph["task_id"] = task_id;
  graph["app_id"] = app_id;
  graph["strategy"] = run.strategy;
  const std::string graph_id =
      (task_id.empty() ? "" : task_id + ".") + app_id + "." + run.strategy.code();
  store.putDocument(Collection::Graphs, graph_id, graph);

  for (const auto& a : deriveArtifacts(run)) {
    store.putDocument(Collection::Crashes, a.crash.crash_id, a.crash);
    store.putDocument(Collection::Reports, a.crash.crash_id, a.report);
    store.putText(Collection::Reports, a.crash.crash_id, "html", a.html, task_id);
    store.putText(Collection::Scripts, a.crash.crash_id, "cscript", a.script_text, task_id);
  }
}

// ---------------------------------------------------------------------------
// Corpus

std::vector<PlantedCrash> loadManifest(const Json& manifest) {
  std::vector<PlantedCrash> out;
  static const std::set<std::string> kDimensions{"traversal", "text_mode", "context_mode"};
  const Json& list = manifest.at("planted_crashes");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Json& p = list[i];
    PlantedCrash c;
    c.rule = p.at("rule").get<std::string>();
    const Json reqs = p.value("requires", Json::object());
    for (const auto& [dim, values] : reqs.items()) {
      if (!kDimensions.count(dim)) {
        throw ValidationError("planted_crashes[" + std::to_string(i) + "].requires",
                              "unknown dimension '" + dim + "'");
      }
      c.requires_values[dim] = values.get<std::vector<std::string>>();
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CorpusApp> loadCorpus(const fs::path& dir) {
  std::vector<CorpusApp> out;
  const std::string suffix = ".model.json";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() <= suffix.size() ||
        file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    CorpusApp app;
    app.name = file.substr(0, file.size() - suffix.size());
    app.model = entry.path();
    app.ir = dir / (app.name + ".ir.json");
    app.manifest = dir / (app.name + ".manifest.json");
    if (!fs::exists(app.ir) || !fs::exists(app.manifest)) continue;
    app.planted = loadManifest(readJsonFile(app.manifest));
    out.push_back(std::move(app));
  }
  std::sort(out.begin(), out.end(),
            [](const CorpusApp& a, const CorpusApp& b) { return a.name < b.name; });
  return out;
}

bool satisfies(const StrategyConfig& s, const PlantedCrash& planted) {
  auto has = [&](const char* dim, std::string_view value) {
    auto it = planted.requires_values.find(dim);
    if (it == planted.requires_values.end()) return true;
    return std::find(it->second.begin(), it->second.end(), value) != it->second.end();
  };
  return has("traversal", toString(s.traversal)) && has("text_mode", toString(s.text_mode)) &&
         has("context_mode", toString(s.context_mode));
}

std::string plantedSignature(const AppModel& model, const std::string& rule) {
  const CrashRule* r = model.crashRule(rule);
  if (!r) throw ValidationError("rule", "unknown crash rule '" + rule + "'");
  return crashSignature(r->exception, model.app.package).value;
}

std::vector<CorpusCheck> runCorpus(const fs::path& dir, std::uint64_t base_seed,
                                   int workers) {
  std::vector<CorpusCheck> checks;
  for (const auto& entry : loadCorpus(dir)) {
    const LoadedApp app = loadAppFiles(entry.model, entry.ir);
    ExploreRequest req;
    req.base_seed = base_seed;
    req.workers = workers;
    const std::vector<StrategyRun> runs = exploreMatrix(app, req);

    // Strategy sensitivity.
    {
      CorpusCheck c{entry.name, "strategy-sensitivity", true, ""};
      for (const auto& run : runs) {
        if (run.error) {
          c.pass = false;
          c.detail += run.strategy.code() + " failed: " + *run.error + "; ";
        }
      }
      for (const auto& planted : entry.planted) {
        const std::string sig = plantedSignature(*app.model, planted.rule);
        int found = 0;
        for (const auto& run : runs) {
          const auto n = std::count_if(run.result.crashes.begin(), run.result.crashes.end(),
                                       [&](const CrashRecord& r) { return r.signature == sig; });
          if (n == 0) continue;
          if (!satisfies(run.strategy, planted)) {
            c.pass = false;
            c.detail += planted.rule + " found by " + run.strategy.code() +
                        ", which lacks a required dimension; ";
          }
          found += static_cast<int>(n);
        }
        if (found == 0) {
          c.pass = false;
          c.detail += planted.rule + " never found; ";
        }
      }
      checks.push_back(std::move(c));
    }

    // Script reproduction and report completeness.
    CorpusCheck repro{entry.name, "script-reproduction", true, ""};
    CorpusCheck report{entry.name, "report-completeness", true, ""};
    int crashes = 0;
    for (const auto& run : runs) {
      for (const auto& a : deriveArtifacts(run)) {
        ++crashes;
        auto device = simulatorSessions(app.model)(run.strategy)();
        const ReplayResult rr =
            replayScript(parseScript(a.script_text), *device, app.model->app.package);
        if (rr.outcome != ReplayOutcome::Reproduced || rr.signature != a.crash.signature) {
          repro.pass = false;
          repro.detail += a.crash.crash_id + " replay " + std::string(toString(rr.outcome)) +
                          " at line " + std::to_string(rr.line) + "; ";
        }
        const auto issues = validateAgainst("report", Json(a.report));
        const bool frames_ok = std::all_of(
            a.report.pruned_trace.frames.begin(), a.report.pruned_trace.frames.end(),
            [&](const StackFrame& f) { return inAppPackage(f.package, a.crash.app_package); });
        if (!issues.empty() || a.report.steps.empty() ||
            a.report.steps.size() != static_cast<std::size_t>(a.crash.crash_step_index) ||
            a.report.screen_flow.size() != a.report.steps.size() || !frames_ok) {
          report.pass = false;
          report.detail += a.crash.crash_id + " incomplete; ";
        }
      }
    }
    repro.detail = std::to_string(crashes) + " crashes. " + repro.detail;
    checks.push_back(std::move(repro));
    checks.push_back(std::move(report));
  }
  return checks;
}

}  // namespace crashscope
