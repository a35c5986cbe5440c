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

#pragma once

// End-to-end plumbing shared by the CLI and the service: load an app, run
// the strategy matrix, derive reports and scripts, persist artifacts, and
// check a corpus against its ground-truth manifests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crashscope/analysis.hpp"
#include "crashscope/report.hpp"
#include "crashscope/ripper.hpp"
#include "crashscope/script.hpp"
#include "crashscope/simulator.hpp"
#include "crashscope/store.hpp"

namespace crashscope {

struct LoadedApp {
  std::shared_ptr<const AppModel> model;
  AppIR ir;
  FeatureMap features;
  Json model_json;
  Json ir_json;
  std::vector<std::string> warnings;  // model warnings plus IR/model mismatches
};

// Throws ValidationError (path prefixed with "app_model" or "app_ir").
LoadedApp loadApp(const Json& model, const Json& ir);
LoadedApp loadAppFiles(const std::filesystem::path& model,
                       const std::filesystem::path& ir);

// Simulator session per strategy; the pid is derived from the strategy seed
// so logs differ across strategies but not across runs.
DeviceFactoryFor simulatorSessions(std::shared_ptr<const AppModel> model);

struct ExploreRequest {
  std::vector<StrategyConfig> strategies = strategyMatrix();
  std::uint64_t base_seed = 0;
  ExplorationBudget budget;
  int workers = 1;
  std::string task_id;
};

struct CrashArtifacts {
  CrashRecord crash;
  ReportDoc report;
  std::string html;
  CrashScript script;
  std::string script_text;
};

// Report and script for every crash of one run, in crash order.
std::vector<CrashArtifacts> deriveArtifacts(const StrategyRun& run);

// Runs the matrix. Trace ids get "<task_id>." prepended when a task id is
// set, so several tasks can share a store.
std::vector<StrategyRun> exploreMatrix(const LoadedApp& app, const ExploreRequest& req,
                                       const StrategyDone& on_done = {});

// Writes traces, crashes, graph, screenshots, reports and scripts of one run.
void persistRun(Store& store, const StrategyRun& run, const std::string& task_id);

// ---------------------------------------------------------------------------
// Corpus

struct PlantedCrash {
  std::string rule;
  // dimension ("traversal", "text_mode", "context_mode") -> allowed values
  std::map<std::string, std::vector<std::string>> requires_values;
};

struct CorpusApp {
  std::string name;
  std::filesystem::path model;
  std::filesystem::path ir;
  std::filesystem::path manifest;
  std::vector<PlantedCrash> planted;
};

// Every <name>.model.json with matching .ir.json and .manifest.json, sorted
// by name.
std::vector<CorpusApp> loadCorpus(const std::filesystem::path& dir);
std::vector<PlantedCrash> loadManifest(const Json& manifest);

// Whether the strategy has every required dimension value.
bool satisfies(const StrategyConfig& s, const PlantedCrash& planted);

// Signature the rule's exception produces once captured.
std::string plantedSignature(const AppModel& model, const std::string& rule);

struct CorpusCheck {
  std::string app;
  std::string check;
  bool pass = false;
  std::string detail;
};

// Strategy sensitivity, script reproduction and report completeness per app.
std::vector<CorpusCheck> runCorpus(const std::filesystem::path& dir,
                                   std::uint64_t base_seed, int workers);

}  // namespace crashscope
