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

// GUI ripping engine.
//
// Explores an app depth-first over a component stack of
// (screen state, component, action) triples, learning a transition graph as
// it goes. Crashes are captured, the app is relaunched and exploration
// continues from the remaining stack, navigating back through the learned
// graph when needed.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashscope/analysis.hpp"
#include "crashscope/device.hpp"
#include "crashscope/domain.hpp"

namespace crashscope {

struct ComponentRef {
  std::string state_key;
  std::string component;
  Action action = Action::Tap;  // Tap or LongTap

  auto operator<=>(const ComponentRef&) const = default;
};

struct GraphEdge {
  std::string from;
  UiEvent event;
  std::string to;
  bool stale = false;  // replay landed elsewhere; not used for navigation

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

class TransitionGraph {
 public:
  // The first node added becomes the root.
  bool addNode(const ScreenState& state);
  bool hasNode(std::string_view key) const;
  const ScreenState& node(std::string_view key) const;
  // Deduplicated on (from, target, action, to). Returns true when new.
  bool addEdge(const std::string& from, const UiEvent& event,
               const std::string& to);
  void markStale(std::size_t edge);

  // Fewest non-stale edges from -> to; ties go to the path whose edges were
  // inserted first. Empty vector for from == to.
  std::optional<std::vector<std::size_t>> shortestPath(std::string_view from,
                                                       std::string_view to) const;

  const std::string& root() const { return root_; }
  const std::vector<ScreenState>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  std::string toDot() const;

  friend bool operator==(const TransitionGraph&, const TransitionGraph&) = default;

 private:
  std::string root_;
  std::vector<ScreenState> nodes_;  // insertion order
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<GraphEdge> edges_;
};

void to_json(Json& j, const TransitionGraph& g);
void from_json(const Json& j, TransitionGraph& g);

struct ExplorationBudget {
  int max_events = 500;
  double max_wall_time_s = 3600.0;
};

struct ExplorationResult {
  std::vector<ExecutionTrace> traces;
  std::vector<CrashRecord> crashes;
  TransitionGraph graph;
  std::map<std::string, std::string> screenshots;  // id -> SVG
  int events_executed = 0;    // counted against the budget
  int navigation_events = 0;  // replays by navigateTo
  bool budget_exhausted = false;
};

struct ExploreOptions {
  ExplorationBudget budget;
  // Prepended to every trace id; lets several tasks share one store.
  std::string id_prefix;
  std::string task_id;
};

ExplorationResult exploreApp(const DeviceFactory& device, const AppInfo& app,
                             const StrategyConfig& strategy,
                             const FeatureMap& features,
                             const ExploreOptions& options = {});

// ---------------------------------------------------------------------------
// Crash detection

struct CrashDetection {
  // Set when the crash dialog is visible. stack_trace, signature, context,
  // orientation, resolution and device are filled in; ids are left to the
  // caller.
  std::optional<CrashRecord> crash;
  // Uncaught exceptions that did not bring up the dialog.
  std::vector<StackTrace> warnings;
};

// Call after every executeEvent. Drains the exception log.
CrashDetection detectCrash(DevicePort& device, std::string_view app_package);

// ---------------------------------------------------------------------------
// Navigation

enum class NavigationOutcome { Reached, Unreachable };

// Receives every event navigateTo replays. The default executes the event
// directly; the ripper records it as a trace step and prepares each screen
// (context, text) before acting on it.
class NavigationSink {
 public:
  virtual ~NavigationSink() = default;
  // Returns false if the device crashed or the run must stop.
  virtual bool prepare(DevicePort& device, const ScreenState& at);
  virtual EventResult perform(DevicePort& device, const UiEvent& event,
                              const ScreenState& before);
};

struct NavigationResult {
  NavigationOutcome outcome = NavigationOutcome::Unreachable;
  int events = 0;
  bool crashed = false;
};

// Relaunches when the current state has no path to target, then replays the
// shortest known path, checking each landing state. A mismatch marks the edge
// stale.
NavigationResult navigateTo(DevicePort& device, TransitionGraph& graph,
                            std::string_view target, NavigationSink& sink);
NavigationResult navigateTo(DevicePort& device, TransitionGraph& graph,
                            std::string_view target);

// ---------------------------------------------------------------------------
// Strategy matrix

// seed(strategy) = base_seed XOR fnv1a64(strategy name)
std::uint64_t strategySeed(const StrategyConfig& strategy, std::uint64_t base_seed);

struct StrategyRun {
  StrategyConfig strategy;
  ExplorationResult result;
  std::optional<std::string> error;
};

// Builds a device factory for one strategy run.
using DeviceFactoryFor = std::function<DeviceFactory(const StrategyConfig&)>;
// Called from worker threads as each strategy finishes.
using StrategyDone = std::function<void(const StrategyRun&)>;

// Runs every cell on its own session with up to worker_count threads. Output
// order follows `cells` regardless of worker_count.
std::vector<StrategyRun> runMatrix(const DeviceFactoryFor& devices,
                                   const AppInfo& app, const FeatureMap& features,
                                   const std::vector<StrategyConfig>& cells,
                                   std::uint64_t base_seed, int worker_count,
                                   const ExploreOptions& options = {},
                                   const StrategyDone& on_done = {});

}  // namespace crashscope
