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

// crashscope: command-line face of the pipeline.
//
// Exit codes: 0 success, 1 domain error (bad input, failed check), 2 usage.
// Diagnostics go to stderr; machine output to stdout.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "crashscope/pipeline.hpp"
#include "crashscope/service.hpp"

namespace fs = std::filesystem;
using namespace crashscope;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void printJson(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::string readFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool endsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// ---------------------------------------------------------------------------
// analyze

int runAnalyze(const std::string& ir_path) {
  const AppIR ir = loadAppIRFile(ir_path);
  printJson(extractFeatureMap(ir));
  return 0;
}

// ---------------------------------------------------------------------------
// explore

struct ExploreArgs {
  std::vector<std::string> files;
  std::vector<std::string> strategies;
  bool all = false;
  std::uint64_t seed = 0;
  int budget = ExplorationBudget{}.max_events;
  std::string out;
  int workers = 1;
};

struct CrashRow {
  std::string signature;
  std::string exception_type;
  std::string message;
  int steps = 0;  // shortest crash trace across strategies
  std::vector<std::string> strategies;
  std::string planted;
};

int runExplore(const ExploreArgs& args, bool json) {
  std::string model, ir, manifest;
  for (const auto& f : args.files) {
    std::string* slot = endsWith(f, ".model.json")      ? &model
                        : endsWith(f, ".ir.json")       ? &ir
                        : endsWith(f, ".manifest.json") ? &manifest
                                                        : nullptr;
    if (!slot) {
      throw UsageError(f + ": expected a .model.json, .ir.json or .manifest.json file");
    }
    if (!slot->empty()) throw UsageError(f + ": more than one file of this kind");
    *slot = f;
  }
  if (model.empty() || ir.empty()) throw UsageError("explore needs an app model and an app IR");
  if (args.all == !args.strategies.empty()) {
    throw UsageError("pass either --all or at least one --strategy");
  }

  const LoadedApp app = loadAppFiles(model, ir);
  for (const auto& w : app.warnings) std::cerr << "warning: " << w << "\n";

  ExploreRequest req;
  if (!args.all) {
    req.strategies.clear();
    for (const auto& s : args.strategies) {
      try {
        req.strategies.push_back(parseStrategy(s));
      } catch (const ContractViolation& e) {
        throw UsageError("--strategy " + s + ": " + e.what());
      }
    }
  }
  req.base_seed = args.seed;
  req.budget.max_events = args.budget;
  req.workers = args.workers;
  const auto runs = exploreMatrix(app, req);

  std::map<std::string, std::string> planted;  // signature -> rule
  if (!manifest.empty()) {
    for (const auto& p : loadManifest(Json::parse(readFile(manifest)))) {
      planted[plantedSignature(*app.model, p.rule)] = p.rule;
    }
  }

  std::map<std::string, CrashRow> rows;
  Json per_strategy = Json::array();
  bool failed = false;
  for (const auto& run : runs) {
    if (run.error) {
      std::cerr << "error: " << run.strategy.name() << ": " << *run.error << "\n";
      failed = true;
    }
    per_strategy.push_back(Json{{"strategy", run.strategy.name()},
                                {"events", run.result.events_executed},
                                {"traces", run.result.traces.size()},
                                {"crashes", run.result.crashes.size()},
                                {"budget_exhausted", run.result.budget_exhausted}});
    std::set<std::string> seen;
    for (const auto& c : run.result.crashes) {
      auto [it, fresh] = rows.try_emplace(c.signature);
      CrashRow& row = it->second;
      if (fresh) {
        row.signature = c.signature;
        row.exception_type = c.stack_trace.exception_type;
        row.message = c.stack_trace.message;
        row.steps = c.crash_step_index;
        if (auto p = planted.find(c.signature); p != planted.end()) row.planted = p->second;
      }
      row.steps = std::min(row.steps, c.crash_step_index);
      if (seen.insert(c.signature).second) row.strategies.push_back(run.strategy.name());
    }
  }

  if (!args.out.empty()) {
    Store store(args.out);
    for (const auto& run : runs) {
      if (!run.error) persistRun(store, run, "");
    }
  }

  if (json) {
    Json crashes = Json::array();
    for (const auto& [sig, r] : rows) {
      crashes.push_back(Json{{"signature", r.signature},
                             {"exception_type", r.exception_type},
                             {"message", r.message},
                             {"steps", r.steps},
                             {"strategies", r.strategies},
                             {"planted", r.planted.empty() ? Json() : Json(r.planted)}});
    }
    printJson(Json{{"app", app.model->app.name},
                   {"seed", args.seed},
                   {"strategies", per_strategy},
                   {"crashes", crashes}});
  } else {
    std::cout << app.model->app.name << ": " << runs.size() << " strategies, " << rows.size()
              << " unique crashes\n";
    std::cout << std::left << std::setw(34) << "SIGNATURE" << std::setw(36) << "EXCEPTION"
              << std::setw(7) << "STEPS" << std::setw(18) << "PLANTED" << "STRATEGIES\n";
    for (const auto& [sig, r] : rows) {
      std::cout << std::setw(34) << r.signature << std::setw(36) << r.exception_type
                << std::setw(7) << r.steps << std::setw(18) << (r.planted.empty() ? "-" : r.planted)
                << r.strategies.size() << "\n";
      for (const auto& s : r.strategies) std::cout << "    " << s << "\n";
    }
  }
  return failed ? kExitDomain : 0;
}

// ---------------------------------------------------------------------------
// report

int runReport(const std::string& crash_id, const std::string& store_path, std::string out,
              bool json) {
  if (!fs::is_directory(store_path)) throw Error("no store at " + store_path);
  Store store(store_path);
  const std::string html = store.getText(Collection::Reports, crash_id, "html");
  if (out.empty()) out = crash_id + ".html";
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write " + out);
  f << html;
  f.close();
  if (json) {
    printJson(Json{{"crash_id", crash_id},
                   {"path", out},
                   {"report", store.getDocument(Collection::Reports, crash_id)}});
  } else {
    std::cout << out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// replay

int runReplay(const std::string& script_path, const std::string& model_path, bool json) {
  const CrashScript script = parseScript(readFile(script_path));
  auto model = std::make_shared<const AppModel>(loadAppModelFile(model_path));
  if (script.header.app_id != model->app.id || script.header.app_version != model->app.version) {
    // Mutated builds of the same app are the point of replay, so only warn.
    std::cerr << "warning: script recorded on " << script.header.app_id << "@"
              << script.header.app_version << ", replaying on " << model->app.id << "@"
              << model->app.version << "\n";
  }
  auto device = launch(model);
  const ReplayResult r = replayScript(script, *device, model->app.package);
  if (json) {
    printJson(Json{{"outcome", toString(r.outcome)},
                   {"signature", r.signature ? Json(*r.signature) : Json()},
                   {"line", r.line},
                   {"detail", r.detail}});
  } else {
    std::cout << toString(r.outcome);
    if (r.signature) std::cout << " " << *r.signature;
    std::cout << "\n";
    if (!r.detail.empty()) std::cerr << "line " << r.line << ": " << r.detail << "\n";
  }
  return r.outcome == ReplayOutcome::Reproduced ? 0 : kExitDomain;
}

// ---------------------------------------------------------------------------
// serve

int runServe(ServiceConfig config, bool json) {
  // Block termination signals before any thread starts so that only sigwait
  // below sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Service service(std::move(config));
  const int port = service.start();
  if (json) {
    std::cout << Json{{"port", port}}.dump() << std::endl;
  } else {
    std::cout << "listening on port " << port << std::endl;
  }
  int sig = 0;
  sigwait(&set, &sig);
  std::cerr << "shutting down\n";
  service.stop();
  return 0;
}

// ---------------------------------------------------------------------------
// corpus run

int runCorpusCommand(const std::string& dir, std::uint64_t seed, int workers, bool json) {
  const auto started = std::chrono::steady_clock::now();
  const auto checks = runCorpus(dir, seed, workers);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  bool ok = !checks.empty();
  for (const auto& c : checks) ok = ok && c.pass;
  if (json) {
    Json out = Json::array();
    for (const auto& c : checks) {
      out.push_back(Json{{"app", c.app}, {"check", c.check}, {"pass", c.pass}, {"detail", c.detail}});
    }
    printJson(Json{{"pass", ok}, {"seconds", secs}, {"checks", out}});
  } else {
    for (const auto& c : checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.app << " " << c.check;
      if (!c.detail.empty()) std::cout << ": " << c.detail;
      std::cout << "\n";
    }
    std::cout << (ok ? "corpus ok" : "corpus FAILED") << " (" << checks.size() << " checks, "
              << std::fixed << std::setprecision(2) << secs << " s)\n";
  }
  if (checks.empty()) std::cerr << "no corpus apps found in " << dir << "\n";
  return ok ? 0 : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CrashScope crash-discovery workbench", "crashscope"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable output on stdout");

  std::string ir_path;
  auto* analyze = app.add_subcommand("analyze", "Print the contextual feature map of an app IR");
  analyze->add_option("app-ir", ir_path, "App IR JSON")->required();

  ExploreArgs ex;
  auto* explore = app.add_subcommand("explore", "Run exploration strategies on an app");
  explore->add_option("files", ex.files, "<name>.model.json <name>.ir.json [<name>.manifest.json]")
      ->required();
  explore->add_option("--strategy", ex.strategies, "Strategy triple, e.g. TOP_DOWN,EXPECTED,ADVERSE");
  explore->add_flag("--all", ex.all, "All 12 strategies");
  explore->add_option("--seed", ex.seed, "Base seed");
  explore->add_option("--budget", ex.budget, "Events per strategy")->check(CLI::PositiveNumber);
  explore->add_option("--out", ex.out, "Persist artifacts into this store");
  explore->add_option("--workers", ex.workers, "Parallel strategy runs")->check(CLI::Range(1, 64));

  std::string crash_id, store_path, report_out;
  auto* report = app.add_subcommand("report", "Write the HTML report of a stored crash");
  report->add_option("crash-id", crash_id)->required();
  report->add_option("--store", store_path, "Store directory")->required();
  report->add_option("--out", report_out, "Output path (default <crash-id>.html)");

  std::string script_path, model_path;
  auto* replay = app.add_subcommand("replay", "Replay a crash script on a fresh session");
  replay->add_option("script", script_path)->required()->check(CLI::ExistingFile);
  replay->add_option("app-model", model_path)->required()->check(CLI::ExistingFile);

  ServiceConfig svc;
  auto* serve = app.add_subcommand("serve", "Run the task service");
  auto* port_opt = serve->add_option("--port", svc.port)->check(CLI::Range(0, 65535));
  auto* store_opt = serve->add_option("--store", svc.store);
  auto* workers_opt = serve->add_option("--workers", svc.workers)->check(CLI::NonNegativeNumber);
  serve->add_option("--host", svc.host);
  serve->add_option("--poll-ms", svc.poll_interval_ms)->check(CLI::PositiveNumber);
  std::string static_dir;
  serve->add_option("--static", static_dir, "Dashboard bundle directory")
      ->check(CLI::ExistingDirectory);

  std::string corpus_dir;
  std::uint64_t corpus_seed = 0;
  int corpus_workers = 1;
  auto* corpus = app.add_subcommand("corpus", "Acceptance corpus");
  corpus->require_subcommand(1);
  auto* corpus_run = corpus->add_subcommand("run", "Check every app against its manifest");
  corpus_run->add_option("dir", corpus_dir)->required()->check(CLI::ExistingDirectory);
  corpus_run->add_option("--seed", corpus_seed);
  corpus_run->add_option("--workers", corpus_workers)->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    if (e.get_name() == "ExtrasError" || e.get_name() == "RequiredError") {
      std::cerr << app.help();
    }
    return kExitUsage;
  }

  try {
    if (*analyze) return runAnalyze(ir_path);
    if (*explore) return runExplore(ex, json);
    if (*report) return runReport(crash_id, store_path, report_out, json);
    if (*replay) return runReplay(script_path, model_path, json);
    if (*serve) {
      // Flags win over the environment.
      ServiceConfig env = applyEnvironment(ServiceConfig{});
      if (!*port_opt) svc.port = env.port;
      if (!*store_opt) svc.store = env.store;
      if (!*workers_opt) svc.workers = env.workers;
      if (!static_dir.empty()) svc.static_dir = static_dir;
      return runServe(std::move(svc), json);
    }
    if (*corpus_run) return runCorpusCommand(corpus_dir, corpus_seed, corpus_workers, json);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
