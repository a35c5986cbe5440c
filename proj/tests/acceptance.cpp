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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Expected values come from the oracles in oracles.hpp, the corpus
// manifests and the normative keyboard tables.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <regex>

#include "crashscope/report.hpp"
#include "crashscope/script.hpp"
#include "crashscope/textgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace crashscope {
namespace {

using testing::fixturesDir;
using testing::readJson;
using testing::slurp;
using testing::TempDir;

// Failures collected by one criterion; the first few are printed.
struct Outcome {
  std::vector<std::string> failures;
  std::string summary;
  void fail(std::string why) { failures.push_back(std::move(why)); }
  bool check(bool ok, const std::string& why) {
    if (!ok) fail(why);
    return ok;
  }
};

int runCriterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = out.failures.empty();
  std::printf("%s %s (%.2f s)%s%s\n", pass ? "PASS" : "FAIL", name.c_str(), secs,
              out.summary.empty() ? "" : ": ", out.summary.c_str());
  for (std::size_t i = 0; i < out.failures.size() && i < 10; ++i) {
    std::printf("    %s\n", out.failures[i].c_str());
  }
  if (out.failures.size() > 10) std::printf("    ... %zu more\n", out.failures.size() - 10);
  std::fflush(stdout);
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Corpus helpers

struct CorpusEntry {
  std::string name;
  LoadedApp app;
  Json manifest;
};

std::vector<CorpusEntry> corpus() {
  std::vector<CorpusEntry> out;
  for (const auto& e : std::filesystem::directory_iterator(fixturesDir())) {
    const std::string file = e.path().filename().string();
    const std::string suffix = ".manifest.json";
    if (file.size() <= suffix.size() || file.substr(file.size() - suffix.size()) != suffix) {
      continue;
    }
    const std::string name = file.substr(0, file.size() - suffix.size());
    out.push_back({name, testing::fixture(name), readJson(e.path())});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

StrategyConfig cell(std::string_view name, std::uint64_t base_seed = 0) {
  StrategyConfig s = parseStrategy(name);
  s.seed = strategySeed(s, base_seed);
  return s;
}

ExplorationResult exploreOne(const LoadedApp& app, const StrategyConfig& s) {
  return exploreApp(simulatorFactory(app.model), app.model->app, s, app.features);
}

// Dimension values read straight off the strategy name.
std::map<std::string, std::string> dimensions(const StrategyConfig& s) {
  const std::string name = s.name();
  const auto a = name.find(',');
  const auto b = name.find(',', a + 1);
  return {{"traversal", name.substr(0, a)},
          {"text_mode", name.substr(a + 1, b - a - 1)},
          {"context_mode", name.substr(b + 1)}};
}

bool hasRequired(const StrategyConfig& s, const Json& requires_values) {
  const auto dims = dimensions(s);
  for (const auto& [dim, allowed] : requires_values.items()) {
    bool any = false;
    for (const auto& v : allowed) any = any || v.get<std::string>() == dims.at(dim);
    if (!any) return false;
  }
  return true;
}

std::size_t countSignature(const ExplorationResult& r, const std::string& sig) {
  std::size_t n = 0;
  for (const auto& c : r.crashes) n += c.signature == sig;
  return n;
}

const ExecutionTrace& traceOf(const ExplorationResult& r, const CrashRecord& c) {
  for (const auto& t : r.traces) {
    if (t.trace_id == c.trace_id) return t;
  }
  throw std::runtime_error("no trace for " + c.crash_id);
}

bool inPackage(const std::string& pkg, const std::string& app) {
  return pkg == app || (pkg.size() > app.size() && pkg.compare(0, app.size(), app) == 0 &&
                        pkg[app.size()] == '.');
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> treeContents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == ".lock") continue;
    out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criteria

void strategySensitivity(Outcome& o) {
  std::size_t checks = 0;
  for (const auto& entry : corpus()) {
    const auto& model = *entry.app.model;
    std::vector<std::pair<StrategyConfig, ExplorationResult>> runs;
    for (const auto& s : strategyMatrix()) {
      runs.emplace_back(cell(s.name()), exploreOne(entry.app, cell(s.name())));
    }
    for (const auto& planted : entry.manifest["planted_crashes"]) {
      const std::string rule = planted["rule"];
      const std::string sig = plantedSignature(model, rule);
      const Json req = planted.value("requires", Json::object());
      std::size_t found = 0;
      for (const auto& [s, r] : runs) {
        const std::size_t n = countSignature(r, sig);
        found += n;
        if (!hasRequired(s, req)) {
          o.check(n == 0, entry.name + "/" + rule + ": " + s.name() + " lacks a required "
                              "dimension but found it " + std::to_string(n) + "x");
        }
        ++checks;
      }
      o.check(found > 0, entry.name + "/" + rule + ": not found by the full matrix");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const auto results = runCorpus(fixturesDir(), 0, 1);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& c : results) {
    o.check(c.pass, "corpus run " + c.app + " " + c.check + ": " + c.detail);
  }
  o.check(secs < 60.0, "corpus run took " + std::to_string(secs) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu cell checks, corpus run %zu checks in %.2f s", checks,
                results.size(), secs);
  o.summary = buf;
}

void crashResilience(Outcome& o) {
  const CorpusEntry gallery{"two_crash_gallery", testing::fixture("two_crash_gallery"),
                            readJson(fixturesDir() / "two_crash_gallery.manifest.json")};
  const auto& planted = gallery.manifest["planted_crashes"];
  o.check(planted.size() == 2, "fixture should plant two crashes");
  int runs = 0;
  for (const auto& s : strategyMatrix()) {
    bool eligible = true;
    for (const auto& p : planted) eligible = eligible && hasRequired(s, p.value("requires", Json::object()));
    if (!eligible) continue;
    const ExplorationResult r = exploreOne(gallery.app, cell(s.name()));
    for (const auto& p : planted) {
      const std::string sig = plantedSignature(*gallery.app.model, p["rule"]);
      o.check(countSignature(r, sig) > 0,
              s.name() + " missed " + p["rule"].get<std::string>() + " in a single run");
    }
    ++runs;
  }
  o.check(runs > 0, "no strategy is eligible for both crashes");
  o.summary = std::to_string(runs) + " single runs carried both signatures";
}

void scriptReproduction(Outcome& o) {
  std::size_t replayed = 0, reproduced = 0, mutated = 0, diverged = 0;
  for (const auto& entry : corpus()) {
    const std::string pkg = entry.app.model->app.package;
    for (const auto& s : strategyMatrix()) {
      const ExplorationResult r = exploreOne(entry.app, cell(s.name()));
      for (const auto& c : r.crashes) {
        const ExecutionTrace& trace = traceOf(r, c);
        const CrashScript script = parseScript(serializeScript(generateScript(trace, c)));
        auto device = launch(entry.app.model, SessionOptions{31337, 1900000000});
        const ReplayResult rr = replayScript(script, *device, pkg);
        ++replayed;
        if (o.check(rr.outcome == ReplayOutcome::Reproduced && rr.signature == c.signature,
                    c.crash_id + ": " + std::string(toString(rr.outcome)) + " " + rr.detail)) {
          ++reproduced;
        }

        // Shrink the last tapped component into the corner so the recorded
        // coordinates miss it.
        const auto& last = trace.steps.back().event;
        if (!last.isPointer() || !last.target) continue;
        Json doc = entry.app.model_json;
        for (auto& screen : doc["screens"]) {
          for (auto& comp : screen["components"]) {
            if (comp["id"] == *last.target) comp["bounds"] = Bounds{0, 0, 1, 1};
          }
        }
        auto moved = std::make_shared<const AppModel>(appModelFromJson(doc));
        auto mdev = launch(moved);
        const ReplayResult mr = replayScript(script, *mdev, pkg);
        ++mutated;
        if (o.check(mr.outcome == ReplayOutcome::Diverged,
                    c.crash_id + " on mutated app: " + std::string(toString(mr.outcome)))) {
          ++diverged;
        }
      }
    }
  }
  o.check(replayed > 0, "no scripts generated");
  o.summary = std::to_string(reproduced) + "/" + std::to_string(replayed) + " reproduced, " +
              std::to_string(diverged) + "/" + std::to_string(mutated) + " mutated diverged";
}

void modelFidelity(Outcome& o) {
  std::vector<std::pair<std::string, std::shared_ptr<const AppModel>>> models;
  for (const auto& entry : corpus()) models.emplace_back(entry.name, entry.app.model);
  for (const char* extra : {"linear3", "single_label", "overlap"}) {
    models.emplace_back(extra, testing::dataModel(extra));
  }
  int compared = 0;
  for (const auto& [name, model] : models) {
    if (!oracle::guardFree(*model) || model->screens.size() > 10) continue;
    const auto expected = oracle::bruteForceGraph(model);
    for (const char* s : {"TOP_DOWN,NONE,NORMAL", "BOTTOM_UP,NONE,NORMAL"}) {
      const ExplorationResult r = exploreApp(simulatorFactory(model), model->app, cell(s), {});
      const auto learned = oracle::learnedGraph(r.graph);
      o.check(learned.root == expected.root, name + " " + s + ": root differs");
      o.check(learned.nodes == expected.nodes, name + " " + s + ": nodes differ");
      o.check(learned.edges == expected.edges, name + " " + s + ": edges differ");
      ++compared;
    }
  }
  o.check(compared >= 6, "too few guard-free fixtures");
  o.summary = std::to_string(compared) + " graphs matched the BFS oracle";
}

void staticAnalysis(Outcome& o) {
  std::mt19937_64 rng(20260101);
  int app_level_sites = 0;
  for (int i = 0; i < 200; ++i) {
    const AppIR ir = oracle::randomIR(rng);
    const FeatureMap expected = oracle::warshallFeatureMap(ir);
    app_level_sites += static_cast<int>(expected.app_level.size());
    o.check(extractFeatureMap(ir) == expected, "IR #" + std::to_string(i) + " differs");
  }
  o.check(app_level_sites > 0, "no IR exercised app-level classification");
  o.summary = "200 IRs, " + std::to_string(app_level_sites) + " app-level features";
}

void reportCompleteness(Outcome& o) {
  std::size_t reports = 0;
  for (const auto& entry : corpus()) {
    const std::string pkg = entry.app.model->app.package;
    ExploreRequest req;
    const auto runs = exploreMatrix(entry.app, req);
    for (const auto& run : runs) {
      for (const auto& a : deriveArtifacts(run)) {
        const ExecutionTrace& trace = traceOf(run.result, a.crash);
        const std::string id = a.crash.crash_id;
        for (const char* section : {"general", "steps", "screen-flow", "stack-trace"}) {
          o.check(a.html.find("<section id=\"" + std::string(section) + "\">") !=
                      std::string::npos,
                  id + ": missing section " + section);
        }
        o.check(a.report.steps.size() == trace.steps.size(), id + ": step count differs");
        o.check(!a.report.pruned_trace.frames.empty() || a.crash.frameless,
                id + ": empty pruned trace");
        for (const auto& f : a.report.pruned_trace.frames) {
          o.check(inPackage(f.package, pkg), id + ": foreign frame " + f.package);
        }
        o.check(renderHtml(a.report) == a.html, id + ": rendering is not stable");
        ++reports;
      }
    }
  }

  const LoadedApp weather = testing::fixture("weather_network");
  const ExplorationResult r = exploreOne(weather, cell("TOP_DOWN,NONE,ADVERSE"));
  o.check(!r.crashes.empty(), "weather_network golden crash not found");
  if (!r.crashes.empty()) {
    const auto& c = r.crashes.front();
    auto lookup = [&r](const std::string& ref) -> std::optional<std::string> {
      auto it = r.screenshots.find(ref);
      return it == r.screenshots.end() ? std::nullopt : std::optional(it->second);
    };
    const std::string html = renderHtml(generateReport(c, traceOf(r, c), lookup));
    o.check(html == slurp(testing::dataDir() / "golden" / "weather_network_report.html"),
            "golden HTML differs");
  }
  o.summary = std::to_string(reports) + " reports complete, golden HTML stable";
}

void textGeneration(Outcome& o) {
  struct Table {
    KeyboardType type;
    std::regex shape;
    std::string special;
  };
  const std::vector<Table> tables = {
      {KeyboardType::Text, std::regex("[a-zA-Z0-9 ]{5,12}"),
       "!@#$%^&*()_+-=[]{};:'\",.<>/?\\|~`"},
      {KeyboardType::Number, std::regex("[0-9]{1,8}"), "+-.,#*"},
      {KeyboardType::Phone, std::regex("[0-9]{7,10}"), "+*#(),;-."},
      {KeyboardType::Email, std::regex("[a-z0-9]+@[a-z0-9]+\\.[a-z]{2,3}"),
       "!#$%&'*+/=?^_{}|~-"},
  };
  for (const auto& t : tables) {
    const std::string kind(toString(t.type));
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      SplitMix64 r1(seed), r2(seed);
      const std::string e = expectedText(t.type, r1);
      o.check(std::regex_match(e, t.shape), kind + " expected \"" + e + "\" off-alphabet");
      o.check(e.find_first_of(t.special) == std::string::npos,
              kind + " expected \"" + e + "\" has a special character");
      const std::string u = unexpectedText(t.type, r2);
      o.check(u.find_first_of(t.special) != std::string::npos,
              kind + " unexpected \"" + u + "\" has no special character");
    }
  }
  o.summary = "4 keyboards x 1000 seeds";
}

void determinism(Outcome& o) {
  TempDir dir;
  const std::string cli = CRASHSCOPE_CLI;
  std::size_t files = 0;
  for (const auto& entry : corpus()) {
    const auto base = (fixturesDir() / entry.name).string();
    const std::string args = " explore " + base + ".model.json " + base + ".ir.json " + base +
                             ".manifest.json --all --seed 0 --out ";
    std::map<std::string, std::string> trees[2];
    for (int i = 0; i < 2; ++i) {
      const auto store = dir / (entry.name + "-" + std::to_string(i));
      o.check(shell(cli + args + store.string()) == 0, entry.name + ": explore failed");
      trees[i] = treeContents(store);
    }
    o.check(!trees[0].empty(), entry.name + ": nothing persisted");
    o.check(trees[0] == trees[1], entry.name + ": artifacts differ between runs");
    files += trees[0].size();

    std::multiset<std::string> sigs[2];
    const int workers[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
      ExploreRequest req;
      req.workers = workers[i];
      for (const auto& run : exploreMatrix(entry.app, req)) {
        for (const auto& c : run.result.crashes) sigs[i].insert(c.signature);
      }
    }
    o.check(sigs[0] == sigs[1], entry.name + ": signatures differ between 1 and 4 workers");
  }
  o.summary = std::to_string(files) + " files byte-identical, worker counts agree";
}

void signatureStability(Outcome& o) {
  std::map<std::string, std::pair<StackTrace, std::string>> traces;  // sig -> trace, package
  for (const auto& entry : corpus()) {
    for (const auto& run : exploreMatrix(entry.app, ExploreRequest{})) {
      for (const auto& c : run.result.crashes) {
        traces.emplace(c.signature, std::make_pair(c.stack_trace, c.app_package));
      }
    }
  }
  o.check(!traces.empty(), "no corpus crashes");
  std::mt19937_64 rng(500);
  int variants = 0;
  while (variants < 500 && !traces.empty()) {
    for (const auto& [sig, tp] : traces) {
      if (variants == 500) break;
      const StackTrace noisy = oracle::injectNoise(tp.first, rng);
      const std::string got = crashSignature(noisy, tp.second).value;
      o.check(got == sig, "variant " + std::to_string(variants) + " of " + sig + " gave " + got);
      ++variants;
    }
  }
  o.summary = std::to_string(variants) + " noisy variants over " +
              std::to_string(traces.size()) + " crashes";
}

}  // namespace
}  // namespace crashscope

int main() {
  using namespace crashscope;
  int failed = 0;
  failed += runCriterion("strategy-sensitivity", strategySensitivity);
  failed += runCriterion("crash-resilience", crashResilience);
  failed += runCriterion("script-reproduction", scriptReproduction);
  failed += runCriterion("model-fidelity", modelFidelity);
  failed += runCriterion("static-analysis-oracle", staticAnalysis);
  failed += runCriterion("report-completeness", reportCompleteness);
  failed += runCriterion("text-generator", textGeneration);
  failed += runCriterion("determinism", determinism);
  failed += runCriterion("signature-stability", signatureStability);
  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
