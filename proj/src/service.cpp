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

#include "crashscope/service.hpp"

#include <chrono>
#include <cstdlib>
#include <map>
#include <set>

#include "httplib.h"

#include "crashscope/pipeline.hpp"
#include "crashscope/schema.hpp"

namespace crashscope {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPlaceholderPage = R"(<!DOCTYPE html>
<html lang="en"><head><meta charset="utf-8"><title>CrashScope</title></head>
<body>
<h1>CrashScope service</h1>
<p>The dashboard bundle is not built. The API is available:</p>
<ul>
<li>POST /api/tasks</li>
<li>GET /api/tasks</li>
<li>GET /api/tasks/{id}</li>
<li>GET /api/tasks/{id}/crashes</li>
<li>GET /api/crashes/{id}/report</li>
<li>GET /api/crashes/{id}/script</li>
<li>GET /api/crashes/{id}/trace</li>
</ul>
</body></html>
)";

void sendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void sendError(httplib::Response& res, int status, const std::string& message,
               const std::string& path = {}) {
  Json body{{"error", message}};
  if (!path.empty()) body["path"] = path;
  sendJson(res, status, body);
}

// Maps exceptions to status codes so handlers can throw freely.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFound& e) {
    sendError(res, 404, e.what());
  } catch (const ValidationError& e) {
    sendError(res, 400, e.message(), e.path());
  } catch (const SchemaError& e) {
    sendError(res, 400, e.issues().front().message, e.path());
  } catch (const ContractViolation& e) {
    // Malformed ids and illegal task transitions.
    sendError(res, 400, e.what());
  } catch (const StoreError& e) {
    sendError(res, 503, std::string("store unavailable: ") + e.what());
  } catch (const std::exception& e) {
    sendError(res, 500, e.what());
  }
}

int envInt(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0 || n > 65535) {
    throw ValidationError(name, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return static_cast<int>(n);
}

Json parseJsonField(const std::string& text, const std::string& field) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(field, std::string("invalid JSON: ") + e.what());
  }
}

std::vector<StrategyConfig> parseStrategies(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "all") return strategyMatrix();
  if (!j.is_array()) {
    throw ValidationError("strategies", "expected \"all\" or a list of strategies");
  }
  std::vector<StrategyConfig> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "strategies[" + std::to_string(i) + "]";
    StrategyConfig s;
    try {
      s = j[i].is_string() ? parseStrategy(j[i].get<std::string>())
                           : j[i].get<StrategyConfig>();
    } catch (const std::exception& e) {
      throw ValidationError(where, e.what());
    }
    s.seed = 0;
    if (!seen.insert(s.name()).second) throw ValidationError(where, "duplicate strategy");
    out.push_back(s);
  }
  if (out.empty()) throw ValidationError("strategies", "select at least one strategy");
  return out;
}

Json crashSummary(const CrashRecord& c) {
  return Json{{"crash_id", c.crash_id},
              {"trace_id", c.trace_id},
              {"signature", c.signature},
              {"exception_type", c.stack_trace.exception_type},
              {"message", c.stack_trace.message},
              {"strategy", c.strategy},
              {"steps", c.crash_step_index},
              {"frameless", c.frameless},
              {"dialog_only", c.dialog_only}};
}

}  // namespace

ServiceConfig applyEnvironment(ServiceConfig config) {
  if (const char* s = std::getenv("CRASHSCOPE_STORE"); s && *s) config.store = s;
  config.port = envInt("CRASHSCOPE_PORT", config.port);
  config.workers = envInt("CRASHSCOPE_WORKERS", config.workers);
  return config;
}

// ---------------------------------------------------------------------------
// Task execution

void processTask(Store& store, TaskDoc task) {
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  std::set<std::string> signatures;
  try {
    const LoadedApp app = loadApp(store.getAppModel(task), store.getAppIR(task));
    task.stats.app_name = app.model->app.name;
    task.stats.app_version = app.model->app.version;
    store.updateTask(task);

    ExploreRequest req;
    req.strategies = task.strategies;
    req.base_seed = task.base_seed;
    req.budget = task.budget;
    req.workers = 1;  // on_done then runs on this thread, in order
    req.task_id = task.task_id;
    exploreMatrix(app, req, [&](const StrategyRun& run) {
      if (run.error) throw Error(*run.error);
      persistRun(store, run, task.task_id);
      task.progress.strategies_done += 1;
      task.progress.events_executed += run.result.events_executed;
      task.stats.crash_count += static_cast<int>(run.result.crashes.size());
      for (const auto& c : run.result.crashes) signatures.insert(c.signature);
      task.stats.unique_crash_count = static_cast<int>(signatures.size());
      task.stats.running_time_s = elapsed();
      store.updateTask(task);
    });
    task.status = TaskStatus::Completed;
    task.stats.running_time_s = elapsed();
    store.updateTask(task);
  } catch (const ContractViolation&) {
    // Lost the lease to another worker; that worker owns the task now.
    return;
  } catch (const std::exception& e) {
    task.status = TaskStatus::Failed;
    task.error = e.what();
    task.stats.running_time_s = elapsed();
    try {
      store.updateTask(task);
    } catch (const std::exception&) {
      // Store gone; the lease sweep will pick the task up again.
    }
  }
}

// ---------------------------------------------------------------------------
// Service

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.workers < 0) throw ValidationError("workers", "must be >= 0");
  if (!config_.static_dir && fs::is_directory("dashboard/dist")) {
    config_.static_dir = fs::path("dashboard/dist");
  }
}

Service::~Service() { stop(); }

int Service::start() {
  store_ = std::make_unique<Store>(config_.store, config_.store_options);
  store_->recoverStaleTasks();

  http_ = std::make_unique<httplib::Server>();
  routes();
  port_ = config_.port == 0 ? http_->bind_to_any_port(config_.host)
                            : (http_->bind_to_port(config_.host, config_.port)
                                   ? config_.port
                                   : -1);
  if (port_ < 0) {
    throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  running_ = true;
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  for (int i = 0; i < config_.workers; ++i) {
    workers_.emplace_back([this] { workerLoop(); });
  }
  return port_;
}

void Service::wait() {
  std::unique_lock<std::mutex> lock(mu_);
  wake_.wait(lock, [this] { return !running_; });
}

void Service::stop() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (!running_ && !http_thread_.joinable()) return;
    running_ = false;
  }
  wake_.notify_all();
  if (http_) http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
}

void Service::workerLoop() {
  while (running_) {
    std::optional<TaskDoc> task;
    try {
      task = store_->pollTask();
    } catch (const std::exception&) {
      task.reset();  // store hiccup; retry after the poll interval
    }
    if (task) {
      processTask(*store_, std::move(*task));
      continue;
    }
    std::unique_lock<std::mutex> lock(mu_);
    wake_.wait_for(lock, std::chrono::milliseconds(config_.poll_interval_ms),
                   [this] { return !running_; });
  }
}

void Service::routes() {
  httplib::Server& s = *http_;
  Store& store = *store_;

  s.Post("/api/tasks", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json model, ir, strategies = "all", seed = 0, max_events;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("app_model")) throw ValidationError("app_model", "missing file");
        if (!req.has_file("app_ir")) throw ValidationError("app_ir", "missing file");
        model = parseJsonField(req.get_file_value("app_model").content, "app_model");
        ir = parseJsonField(req.get_file_value("app_ir").content, "app_ir");
        if (req.has_file("strategies")) {
          strategies = parseJsonField(req.get_file_value("strategies").content, "strategies");
        }
        if (req.has_file("seed")) seed = parseJsonField(req.get_file_value("seed").content, "seed");
        if (req.has_file("max_events")) {
          max_events = parseJsonField(req.get_file_value("max_events").content, "max_events");
        }
      } else {
        const Json body = parseJsonField(req.body, "(body)");
        if (!body.is_object() || !body.contains("app_model") || !body.contains("app_ir")) {
          throw ValidationError("(body)", "expected app_model and app_ir");
        }
        model = body["app_model"];
        ir = body["app_ir"];
        strategies = body.value("strategies", Json("all"));
        seed = body.value("seed", Json(0));
        max_events = body.value("max_events", Json());
      }
      const LoadedApp app = loadApp(model, ir);

      TaskDoc task;
      task.strategies = parseStrategies(strategies);
      if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        throw ValidationError("seed", "expected a non-negative integer");
      }
      task.base_seed = seed.get<std::uint64_t>();
      task.budget = config_.budget;
      if (!max_events.is_null()) {
        if (!max_events.is_number_integer() || max_events.get<long long>() < 1) {
          throw ValidationError("max_events", "expected a positive integer");
        }
        task.budget.max_events = max_events.get<int>();
      }
      task.stats.app_name = app.model->app.name;
      task.stats.app_version = app.model->app.version;
      store.putApp(app.model_json, app.ir_json, task);
      const std::string id = store.enqueueTask(task);
      wake_.notify_all();
      // The body stays a plain TaskDoc; loader warnings travel in a header.
      std::string warnings;
      for (const auto& w : app.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
      if (!warnings.empty()) res.set_header("X-CrashScope-Warnings", warnings);
      sendJson(res, 201, store.getTask(id));
    });
  });

  s.Get("/api/tasks", [&](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      Json out = Json::array();
      for (const auto& t : store.listTasks()) out.push_back(t);
      sendJson(res, 200, out);
    });
  });

  s.Get(R"(/api/tasks/([A-Za-z0-9._-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { sendJson(res, 200, store.getTask(req.matches[1].str())); });
  });

  s.Get(R"(/api/tasks/([A-Za-z0-9._-]+)/crashes)",
        [&](const httplib::Request& req, httplib::Response& res) {
          guarded(res, [&] {
            const TaskDoc task = store.getTask(req.matches[1].str());
            Json crashes = Json::array();
            Json groups = Json::array();
            std::map<std::string, std::size_t> group_of;
            for (const auto& id : store.listByTask(task.task_id, Collection::Crashes)) {
              const CrashRecord c = store.getDocument(Collection::Crashes, id).get<CrashRecord>();
              crashes.push_back(crashSummary(c));
              auto [it, fresh] = group_of.emplace(c.signature, groups.size());
              if (fresh) {
                groups.push_back(Json{{"signature", c.signature},
                                      {"exception_type", c.stack_trace.exception_type},
                                      {"message", c.stack_trace.message},
                                      {"count", 0},
                                      {"crash_ids", Json::array()}});
              }
              Json& g = groups[it->second];
              g["count"] = g["count"].get<int>() + 1;
              g["crash_ids"].push_back(c.crash_id);
            }
            sendJson(res, 200,
                     Json{{"task_id", task.task_id},
                          {"status", toString(task.status)},
                          {"total", crashes.size()},
                          {"unique", groups.size()},
                          {"groups", groups},
                          {"crashes", crashes}});
          });
        });

  s.Get(R"(/api/crashes/([A-Za-z0-9._-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { sendJson(res, 200, store.getDocument(Collection::Crashes, req.matches[1].str())); });
  });

  s.Get(R"(/api/crashes/([A-Za-z0-9._-]+)/report)",
        [&](const httplib::Request& req, httplib::Response& res) {
          guarded(res, [&] {
            res.set_content(store.getText(Collection::Reports, req.matches[1].str(), "html"),
                            "text/html; charset=utf-8");
          });
        });

  s.Get(R"(/api/crashes/([A-Za-z0-9._-]+)/report\.json)",
        [&](const httplib::Request& req, httplib::Response& res) {
          guarded(res, [&] {
            sendJson(res, 200, store.getDocument(Collection::Reports, req.matches[1].str()));
          });
        });

  s.Get(R"(/api/crashes/([A-Za-z0-9._-]+)/script)",
        [&](const httplib::Request& req, httplib::Response& res) {
          guarded(res, [&] {
            res.set_content(store.getText(Collection::Scripts, req.matches[1].str(), "cscript"),
                            "text/plain; charset=utf-8");
          });
        });

  s.Get(R"(/api/crashes/([A-Za-z0-9._-]+)/trace)",
        [&](const httplib::Request& req, httplib::Response& res) {
          guarded(res, [&] {
            const CrashRecord c =
                store.getDocument(Collection::Crashes, req.matches[1].str()).get<CrashRecord>();
            sendJson(res, 200, store.getDocument(Collection::Traces, c.trace_id));
          });
        });

  if (config_.static_dir && fs::is_directory(*config_.static_dir)) {
    s.set_mount_point("/", config_.static_dir->string());
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

}  // namespace crashscope
