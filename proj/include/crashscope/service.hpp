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

// HTTP task service and polling workers.
//
//   POST /api/tasks                  multipart: app_model, app_ir, strategies
//   GET  /api/tasks                  task list
//   GET  /api/tasks/{id}             one task
//   GET  /api/tasks/{id}/crashes     crash summaries, deduplicated by signature
//   GET  /api/crashes/{id}           crash record
//   GET  /api/crashes/{id}/report    HTML report
//   GET  /api/crashes/{id}/script    crash script
//   GET  /api/crashes/{id}/trace     execution trace
//   GET  /                           dashboard bundle, or a placeholder page

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "crashscope/ripper.hpp"
#include "crashscope/store.hpp"

namespace httplib {
class Server;
}

namespace crashscope {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path store = "crashscope-store";
  int workers = 2;  // 0 = API only
  int poll_interval_ms = 500;
  ExplorationBudget budget;
  // Dashboard bundle served at /. Defaults to dashboard/dist when present.
  std::optional<std::filesystem::path> static_dir;
  StoreOptions store_options;
};

// Overrides fields from CRASHSCOPE_STORE, CRASHSCOPE_PORT and
// CRASHSCOPE_WORKERS. Throws ValidationError for malformed values.
ServiceConfig applyEnvironment(ServiceConfig config);

// Runs one claimed task to completion: every selected strategy in order,
// persisting artifacts and progress after each. Never throws for task-level
// failures; the task ends FAILED with the diagnostic instead.
void processTask(Store& store, TaskDoc task);

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Opens the store, re-queues orphaned tasks, binds, and starts the HTTP
  // and worker threads. Returns the bound port.
  int start();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  int port() const { return port_; }
  Store& store() { return *store_; }

 private:
  void routes();
  void workerLoop();

  ServiceConfig config_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  std::vector<std::thread> workers_;
  std::atomic<bool> running_{false};
  std::mutex mu_;
  std::condition_variable wake_;
  int port_ = 0;
};

}  // namespace crashscope
