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

#include "crashscope/ripper.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "crashscope/hash.hpp"
#include "crashscope/textgen.hpp"

namespace crashscope {

// ---------------------------------------------------------------------------
// TransitionGraph

bool TransitionGraph::addNode(const ScreenState& state) {
  if (index_.count(state.state_key)) return false;
  if (nodes_.empty()) root_ = state.state_key;
  index_.emplace(state.state_key, nodes_.size());
  nodes_.push_back(state);
  return true;
}

bool TransitionGraph::hasNode(std::string_view key) const {
  return index_.find(key) != index_.end();
}

const ScreenState& TransitionGraph::node(std::string_view key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw ContractViolation("unknown graph node " + std::string(key));
  }
  return nodes_[it->second];
}

bool TransitionGraph::addEdge(const std::string& from, const UiEvent& event,
                              const std::string& to) {
  if (!hasNode(from) || !hasNode(to)) {
    throw ContractViolation("edge endpoints must be graph nodes");
  }
  for (const auto& e : edges_) {
    if (e.from == from && e.to == to && e.event.action == event.action &&
        e.event.target == event.target) {
      return false;
    }
  }
  edges_.push_back(GraphEdge{from, event, to, false});
  return true;
}

void TransitionGraph::markStale(std::size_t edge) { edges_.at(edge).stale = true; }

std::optional<std::vector<std::size_t>> TransitionGraph::shortestPath(
    std::string_view from, std::string_view to) const {
  if (!hasNode(from) || !hasNode(to)) return std::nullopt;
  if (from == to) return std::vector<std::size_t>{};

  std::map<std::string_view, std::size_t> via;  // node -> edge that reached it
  std::set<std::string_view> seen{from};
  std::deque<std::string_view> queue{from};
  while (!queue.empty()) {
    auto at = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (e.stale || e.from != at || seen.count(e.to)) continue;
      seen.insert(e.to);
      via[e.to] = i;
      if (e.to == to) {
        std::vector<std::size_t> path;
        for (std::string_view n = to; n != from; n = edges_[via.at(n)].from) {
          path.push_back(via.at(n));
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(e.to);
    }
  }
  return std::nullopt;
}

std::string TransitionGraph::toDot() const {
  std::ostringstream out;
  out << "digraph transitions {\n";
  for (const auto& n : nodes_) {
    out << "  \"" << n.state_key << "\" [label=\"" << n.activity << "\\n"
        << n.state_key << "\"" << (n.state_key == root_ ? ", shape=doublecircle" : "")
        << "];\n";
  }
  for (const auto& e : edges_) {
    out << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\""
        << toString(e.event.action) << " " << e.event.target.value_or("") << "\""
        << (e.stale ? ", style=dashed" : "") << "];\n";
  }
  out << "}\n";
  return out.str();
}

void to_json(Json& j, const TransitionGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    edges.push_back(
        Json{{"from", e.from}, {"event", e.event}, {"to", e.to}, {"stale", e.stale}});
  }
  j = Json{{"root", g.root()}, {"nodes", g.nodes()}, {"edges", edges}};
}

void from_json(const Json& j, TransitionGraph& g) {
  g = TransitionGraph();
  for (const auto& n : j.at("nodes")) g.addNode(n.get<ScreenState>());
  for (const auto& e : j.at("edges")) {
    g.addEdge(e.at("from").get<std::string>(), e.at("event").get<UiEvent>(),
              e.at("to").get<std::string>());
    if (e.value("stale", false)) g.markStale(g.edges().size() - 1);
  }
}

// ---------------------------------------------------------------------------
// Crash detection

CrashDetection detectCrash(DevicePort& device, std::string_view app_package) {
  CrashDetection out;
  std::vector<StackTrace> drained = device.drainExceptionLog();
  if (!device.crashDialogVisible()) {
    out.warnings = std::move(drained);
    return out;
  }
  CrashRecord r;
  if (drained.empty()) {
    r.stack_trace.exception_type = "DIALOG_ONLY";
    r.stack_trace.message = "crash dialog shown without a logged exception";
    r.dialog_only = true;
  } else {
    // The fatal exception is the last one logged; earlier entries came from
    // the same event without taking the app down.
    r.stack_trace = normalizeStackTrace(drained.back());
    drained.pop_back();
    out.warnings = std::move(drained);
  }
  const CrashSignature sig = crashSignature(r.stack_trace, app_package);
  r.signature = sig.value;
  r.frameless = sig.frameless;
  r.context_at_crash = device.context();
  r.orientation = r.context_at_crash.orientation();
  r.resolution = device.resolution();
  r.app_package = std::string(app_package);
  r.device = device.identification();
  out.crash = std::move(r);
  return out;
}

// ---------------------------------------------------------------------------
// Navigation

bool NavigationSink::prepare(DevicePort&, const ScreenState&) { return true; }

EventResult NavigationSink::perform(DevicePort& device, const UiEvent& event,
                                    const ScreenState&) {
  return device.executeEvent(event);
}

NavigationResult navigateTo(DevicePort& device, TransitionGraph& graph,
                            std::string_view target, NavigationSink& sink) {
  if (!graph.hasNode(target)) {
    throw ContractViolation("navigateTo: target is not a graph node");
  }
  NavigationResult out;
  auto fail = [&](bool crashed) {
    out.outcome = NavigationOutcome::Unreachable;
    out.crashed = crashed;
    return out;
  };

  ScreenState current = device.queryHierarchy();
  std::optional<std::vector<std::size_t>> path;
  if (graph.hasNode(current.state_key)) {
    path = graph.shortestPath(current.state_key, target);
  }
  if (!path) {
    ++out.events;
    if (sink.perform(device, UiEvent::launch(), current) == EventResult::Crashed) {
      return fail(true);
    }
    current = device.queryHierarchy();
    if (current.state_key != graph.root()) return fail(false);
    path = graph.shortestPath(graph.root(), target);
    if (!path) return fail(false);
  }

  for (std::size_t edge : *path) {
    if (!sink.prepare(device, current)) return fail(device.crashDialogVisible());
    const GraphEdge e = graph.edges()[edge];
    ++out.events;
    if (sink.perform(device, e.event, current) == EventResult::Crashed) {
      return fail(true);
    }
    current = device.queryHierarchy();
    if (current.state_key != e.to) {
      graph.markStale(edge);
      return fail(false);
    }
  }
  out.outcome = NavigationOutcome::Reached;
  return out;
}

NavigationResult navigateTo(DevicePort& device, TransitionGraph& graph,
                            std::string_view target) {
  NavigationSink direct;
  return navigateTo(device, graph, target, direct);
}

// ---------------------------------------------------------------------------
// Exploration

namespace {

// Outcome of one engine action.
enum class Flow {
  Done,         // executed, app still running
  Interrupted,  // crash or device error; trace closed and app relaunched
  Halted,       // budget exhausted; stop the run
};

class Explorer final : public NavigationSink {
 public:
  Explorer(DevicePort& device, const AppInfo& app, const StrategyConfig& strategy,
           const FeatureMap& features, const ExploreOptions& options)
      : device_(device),
        app_(app),
        strategy_(strategy),
        features_(features),
        options_(options),
        rng_(strategy.seed),
        started_(std::chrono::steady_clock::now()) {}

  ExplorationResult run();

  bool prepare(DevicePort& device, const ScreenState& at) override;
  EventResult perform(DevicePort& device, const UiEvent& event,
                      const ScreenState& before) override;

 private:
  Flow execute(const UiEvent& event, const ScreenState& before, bool navigation);
  Flow prepareVisit(const ScreenState& at);
  Flow ensureContext(const ScreenState& at);
  // Registers a state; new states get their refs pushed and are prepared.
  void arrive(const ScreenState& at);
  void arrive(const ScreenState& from, const UiEvent& event, const ScreenState& at);
  void pushRefs(const ScreenState& at);
  bool overBudget(bool navigation) const;

  void openTrace();
  void closeTrace(TraceOutcome outcome);
  void interrupt(TraceOutcome outcome);

  DevicePort& device_;
  const AppInfo& app_;
  StrategyConfig strategy_;
  const FeatureMap& features_;
  ExploreOptions options_;
  SplitMix64 rng_;
  std::chrono::steady_clock::time_point started_;

  ExplorationResult result_;
  ExecutionTrace trace_;
  int trace_ordinal_ = 0;

  std::vector<ComponentRef> stack_;
  std::set<ComponentRef> pushed_;
  std::set<ComponentRef> executed_;
  std::set<std::string> discarded_;
  std::set<std::string> rotated_;
  std::set<std::pair<std::string, ContextFeature>> crashing_context_;
  bool filled_this_visit_ = false;
  bool halted_ = false;
  // Set while navigateTo drives the sink, so replayed events are tagged.
  bool navigating_ = false;
};

void Explorer::openTrace() {
  ++trace_ordinal_;
  trace_ = ExecutionTrace();
  char ordinal[8];
  std::snprintf(ordinal, sizeof ordinal, "%02d", trace_ordinal_);
  trace_.trace_id = options_.id_prefix + app_.id + "." + strategy_.code() + ".t" +
                    ordinal;
  trace_.task_id = options_.task_id;
  trace_.app_id = app_.id;
  trace_.app_name = app_.name;
  trace_.app_version = app_.version;
  trace_.strategy = strategy_;
  filled_this_visit_ = false;
}

void Explorer::closeTrace(TraceOutcome outcome) {
  trace_.outcome = outcome;
  result_.traces.push_back(std::move(trace_));
  trace_ = ExecutionTrace();
}

void Explorer::interrupt(TraceOutcome outcome) {
  closeTrace(outcome);
  device_.resetApp();
  openTrace();
}

bool Explorer::overBudget(bool navigation) const {
  if (!navigation && result_.events_executed >= options_.budget.max_events) {
    return true;
  }
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started_;
  return elapsed.count() >= options_.budget.max_wall_time_s;
}

Flow Explorer::execute(const UiEvent& event, const ScreenState& before,
                       bool navigation) {
  if (overBudget(navigation)) {
    halted_ = true;
    return Flow::Halted;
  }
  ExecutionStep step;
  step.index = static_cast<int>(trace_.steps.size()) + 1;
  step.event = event;
  step.screen_before = before.state_key;
  step.navigation = navigation;
  if (event.target) {
    if (const GuiComponent* c = before.find(*event.target)) {
      step.target_label = c->label;
      step.target_bounds = c->bounds;
    }
  }
  step.screenshot_ref = trace_.trace_id + ".s" + std::to_string(step.index);
  result_.screenshots[step.screenshot_ref] = device_.screenshot(event.target);

  (navigation ? result_.navigation_events : result_.events_executed) += 1;
  try {
    step.result = device_.executeEvent(event);
  } catch (const DeviceError& e) {
    trace_.diagnostics.push_back("step " + std::to_string(step.index) + ": " +
                                 e.what());
    interrupt(TraceOutcome::BudgetExhausted);
    return Flow::Interrupted;
  }
  step.context = device_.context();

  CrashDetection detected = detectCrash(device_, app_.package);
  for (auto& w : detected.warnings) trace_.warnings.push_back(normalizeStackTrace(w));

  if (detected.crash) {
    step.screen_after = std::string(kCrashedStateKey);
    trace_.steps.push_back(std::move(step));
    CrashRecord crash = std::move(*detected.crash);
    crash.trace_id = trace_.trace_id;
    crash.task_id = options_.task_id;
    crash.crash_id = trace_.trace_id + ".crash";
    crash.crash_step_index = static_cast<int>(trace_.steps.size());
    crash.strategy = strategy_;
    crash.screenshot_ref = crash.crash_id;
    result_.screenshots[crash.screenshot_ref] = device_.screenshot();
    result_.crashes.push_back(std::move(crash));
    interrupt(TraceOutcome::Crashed);
    return Flow::Interrupted;
  }
  step.screen_after = device_.queryHierarchy().state_key;
  if (step.screen_after != step.screen_before) filled_this_visit_ = false;
  trace_.steps.push_back(std::move(step));
  return Flow::Done;
}

Flow Explorer::ensureContext(const ScreenState& at) {
  for (ContextFeature f : featuresForScreen(features_, at.activity)) {
    if (f == ContextFeature::Rotation) continue;
    if (crashing_context_.count({at.state_key, f})) continue;
    const ContextValue adverse = adverseValue(f);
    if (device_.context().get(f) == adverse) continue;
    Flow flow = execute(UiEvent::contextSet(f, adverse), at, navigating_);
    if (flow == Flow::Interrupted) crashing_context_.insert({at.state_key, f});
    if (flow != Flow::Done) return flow;
  }
  return Flow::Done;
}

Flow Explorer::prepareVisit(const ScreenState& at) {
  // Order on a screen: context, rotation, text, then clicks.
  if (strategy_.context_mode == ContextMode::Adverse) {
    if (Flow f = ensureContext(at); f != Flow::Done) return f;
    if (features_.rotatable.count(at.activity) && !rotated_.count(at.state_key)) {
      rotated_.insert(at.state_key);
      ScreenState current = at;
      for (int i = 0; i < 2; ++i) {
        if (Flow f = execute(UiEvent::rotate(), current, navigating_); f != Flow::Done) {
          return f;
        }
        current = device_.queryHierarchy();
      }
    }
  }
  if (strategy_.text_mode != TextMode::None && !filled_this_visit_) {
    const ScreenState current = device_.queryHierarchy();
    for (const auto& c : current.components) {
      if (c.kind != ComponentKind::TextField) continue;
      const KeyboardType kb = c.keyboard_type.value_or(KeyboardType::Text);
      std::string text = strategy_.text_mode == TextMode::Expected
                             ? expectedText(kb, rng_)
                             : unexpectedText(kb, rng_);
      Flow f = execute(UiEvent::type(c.id, componentCenter(c.bounds), std::move(text)),
                       current, navigating_);
      if (f != Flow::Done) return f;
    }
    filled_this_visit_ = true;
  }
  return Flow::Done;
}

void Explorer::pushRefs(const ScreenState& at) {
  std::vector<ComponentRef> refs;
  for (const auto& c : at.components) {
    if (c.clickable) refs.push_back({at.state_key, c.id, Action::Tap});
    if (c.long_clickable) refs.push_back({at.state_key, c.id, Action::LongTap});
  }
  // Top-down: first component must pop first, so push in reverse.
  if (strategy_.traversal == Traversal::TopDown) std::reverse(refs.begin(), refs.end());
  for (auto& r : refs) {
    if (pushed_.insert(r).second) stack_.push_back(std::move(r));
  }
}

void Explorer::arrive(const ScreenState& at) {
  if (!result_.graph.addNode(at)) return;
  pushRefs(at);
  prepareVisit(at);
}

void Explorer::arrive(const ScreenState& from, const UiEvent& event,
                      const ScreenState& at) {
  const bool fresh = result_.graph.addNode(at);
  result_.graph.addEdge(from.state_key, event, at.state_key);
  if (!fresh) return;
  pushRefs(at);
  prepareVisit(at);
}

bool Explorer::prepare(DevicePort&, const ScreenState& at) {
  return prepareVisit(at) == Flow::Done;
}

EventResult Explorer::perform(DevicePort&, const UiEvent& event,
                              const ScreenState& before) {
  if (execute(event, before, true) == Flow::Done) return trace_.steps.back().result;
  // Interrupted or halted: either way navigation must stop here.
  return EventResult::Crashed;
}

ExplorationResult Explorer::run() {
  openTrace();
  arrive(device_.queryHierarchy());

  while (!halted_ && !stack_.empty()) {
    ComponentRef ref = stack_.back();
    stack_.pop_back();
    if (discarded_.count(ref.state_key) || executed_.count(ref)) continue;

    ScreenState current = device_.queryHierarchy();
    if (current.state_key != ref.state_key) {
      navigating_ = true;
      NavigationResult nav = navigateTo(device_, result_.graph, ref.state_key, *this);
      navigating_ = false;
      if (halted_) break;
      if (nav.outcome != NavigationOutcome::Reached) {
        discarded_.insert(ref.state_key);
        continue;
      }
      current = device_.queryHierarchy();
    }

    Flow flow = prepareVisit(current);
    if (flow == Flow::Halted) break;
    if (flow == Flow::Interrupted) {
      stack_.push_back(ref);  // context/rotation crashed; retry after relaunch
      continue;
    }
    current = device_.queryHierarchy();
    const GuiComponent* c = current.find(ref.component);
    if (!c) {
      discarded_.insert(ref.state_key);
      continue;
    }
    const Point at = componentCenter(c->bounds);
    const UiEvent event = ref.action == Action::Tap ? UiEvent::tap(c->id, at)
                                                    : UiEvent::longTap(c->id, at);
    executed_.insert(ref);
    flow = execute(event, current, false);
    if (flow == Flow::Halted) break;
    if (flow == Flow::Interrupted) continue;

    const ScreenState after = device_.queryHierarchy();
    if (after.state_key != current.state_key) arrive(current, event, after);
  }

  result_.budget_exhausted = halted_;
  const TraceOutcome last =
      halted_ ? TraceOutcome::BudgetExhausted : TraceOutcome::Completed;
  // A relaunch after the final crash leaves an empty trace behind; drop it.
  if (!trace_.steps.empty() || result_.traces.empty() || halted_) closeTrace(last);
  return std::move(result_);
}

}  // namespace

ExplorationResult exploreApp(const DeviceFactory& device, const AppInfo& app,
                             const StrategyConfig& strategy,
                             const FeatureMap& features,
                             const ExploreOptions& options) {
  std::unique_ptr<DevicePort> session = device();
  Explorer explorer(*session, app, strategy, features, options);
  return explorer.run();
}

// ---------------------------------------------------------------------------
// Strategy matrix

std::uint64_t strategySeed(const StrategyConfig& strategy, std::uint64_t base_seed) {
  return base_seed ^ fnv1a64(strategy.name());
}

std::vector<StrategyRun> runMatrix(const DeviceFactoryFor& devices,
                                   const AppInfo& app, const FeatureMap& features,
                                   const std::vector<StrategyConfig>& cells,
                                   std::uint64_t base_seed, int worker_count,
                                   const ExploreOptions& options,
                                   const StrategyDone& on_done) {
  if (worker_count < 1) throw ContractViolation("runMatrix: worker_count must be >= 1");
  std::vector<StrategyRun> runs(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      StrategyRun& run = runs[i];
      run.strategy = cells[i];
      run.strategy.seed = strategySeed(cells[i], base_seed);
      try {
        run.result = exploreApp(devices(run.strategy), app, run.strategy, features,
                                options);
      } catch (const std::exception& e) {
        run.error = std::string(run.strategy.name()) + ": " + e.what();
      }
      if (on_done) on_done(run);
    }
  };
  const int threads = std::min<int>(worker_count, static_cast<int>(cells.size()));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return runs;
}

}  // namespace crashscope
