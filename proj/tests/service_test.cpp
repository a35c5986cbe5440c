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

#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "crashscope/schema.hpp"
#include "crashscope/service.hpp"
#include "httplib.h"
#include "support.hpp"

namespace crashscope {
namespace {

using namespace std::chrono_literals;
using testing::fixturesDir;
using testing::slurp;
using testing::TempDir;

struct Running {
  explicit Running(ServiceConfig config) : service(std::move(config)) {
    port = service.start();
  }
  ~Running() { service.stop(); }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }
  Service service;
  int port = 0;
};

ServiceConfig config(const TempDir& dir, int workers = 1) {
  ServiceConfig c;
  c.port = 0;
  c.store = dir / "store";
  c.workers = workers;
  c.poll_interval_ms = 20;
  return c;
}

httplib::MultipartFormDataItems upload(const std::string& app, const std::string& strategies) {
  return {{"app_model", slurp(fixturesDir() / (app + ".model.json")), "model.json",
           "application/json"},
          {"app_ir", slurp(fixturesDir() / (app + ".ir.json")), "ir.json", "application/json"},
          {"strategies", strategies, "", ""}};
}

Json body(const httplib::Result& r) { return Json::parse(r->body); }

// Polls until the task leaves QUEUED/RUNNING; returns every snapshot seen.
std::vector<Json> waitForTask(httplib::Client& c, const std::string& id) {
  std::vector<Json> seen;
  const auto deadline = std::chrono::steady_clock::now() + 60s;
  while (std::chrono::steady_clock::now() < deadline) {
    auto r = c.Get("/api/tasks/" + id);
    if (!r || r->status != 200) break;
    seen.push_back(body(r));
    const std::string status = seen.back()["status"];
    if (status == "COMPLETED" || status == "FAILED") break;
    std::this_thread::sleep_for(10ms);
  }
  return seen;
}

TEST(Service, EndToEndTask) {
  TempDir dir;
  Running svc(config(dir));
  auto c = svc.client();

  auto posted = c.Post("/api/tasks", upload("two_crash_gallery", R"("all")"));
  ASSERT_TRUE(posted);
  ASSERT_EQ(posted->status, 201) << posted->body;
  const Json task = body(posted);
  EXPECT_TRUE(validateAgainst("task", task).empty());
  EXPECT_EQ(task["status"], "QUEUED");
  const std::string id = task["task_id"];

  const auto snapshots = waitForTask(c, id);
  ASSERT_FALSE(snapshots.empty());
  EXPECT_EQ(snapshots.back()["status"], "COMPLETED") << snapshots.back().dump();
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    EXPECT_GE(snapshots[i]["progress"]["strategies_done"],
              snapshots[i - 1]["progress"]["strategies_done"]);
    EXPECT_GE(snapshots[i]["progress"]["events_executed"],
              snapshots[i - 1]["progress"]["events_executed"]);
  }
  const Json done = snapshots.back();
  EXPECT_TRUE(validateAgainst("task", done).empty());
  EXPECT_EQ(done["progress"]["strategies_done"], 12);

  auto crashes = c.Get("/api/tasks/" + id + "/crashes");
  ASSERT_EQ(crashes->status, 200);
  const Json summary = body(crashes);
  EXPECT_EQ(summary["total"], done["stats"]["crash_count"]);
  EXPECT_EQ(summary["unique"], 2);
  EXPECT_EQ(summary["crashes"].size(), summary["total"].get<std::size_t>());

  const LoadedApp app = testing::fixture("two_crash_gallery");
  std::set<std::string> sigs;
  for (const auto& g : summary["groups"]) sigs.insert(g["signature"].get<std::string>());
  EXPECT_EQ(sigs, (std::set<std::string>{plantedSignature(*app.model, "album_cover"),
                                         plantedSignature(*app.model, "camera_busy")}));

  const std::string crash_id = summary["crashes"][0]["crash_id"];
  auto report = c.Get("/api/crashes/" + crash_id + "/report");
  ASSERT_EQ(report->status, 200);
  EXPECT_EQ(report->get_header_value("Content-Type").rfind("text/html", 0), 0u);
  EXPECT_NE(report->body.find("<section id=\"stack-trace\">"), std::string::npos);

  auto script = c.Get("/api/crashes/" + crash_id + "/script");
  ASSERT_EQ(script->status, 200);
  EXPECT_EQ(script->get_header_value("Content-Type").rfind("text/plain", 0), 0u);
  EXPECT_EQ(script->body, svc.service.store().getText(Collection::Scripts, crash_id, "cscript"));

  auto trace = c.Get("/api/crashes/" + crash_id + "/trace");
  ASSERT_EQ(trace->status, 200);
  EXPECT_TRUE(validateAgainst("trace", body(trace)).empty());
  EXPECT_EQ(body(trace)["trace_id"], summary["crashes"][0]["trace_id"]);

  auto crash = c.Get("/api/crashes/" + crash_id);
  ASSERT_EQ(crash->status, 200);
  EXPECT_TRUE(validateAgainst("crash", body(crash)).empty());

  auto list = c.Get("/api/tasks");
  ASSERT_EQ(list->status, 200);
  EXPECT_EQ(body(list).size(), 1u);
}

TEST(Service, StrategySubsetAndJsonBody) {
  TempDir dir;
  Running svc(config(dir));
  auto c = svc.client();
  const Json req{{"app_model", testing::readJson(fixturesDir() / "weather_network.model.json")},
                 {"app_ir", testing::readJson(fixturesDir() / "weather_network.ir.json")},
                 {"strategies", {"TOP_DOWN,NONE,ADVERSE", "TOP_DOWN,NONE,NORMAL"}},
                 {"seed", 3}};
  auto posted = c.Post("/api/tasks", req.dump(), "application/json");
  ASSERT_EQ(posted->status, 201) << posted->body;
  const std::string id = body(posted)["task_id"];
  EXPECT_EQ(body(posted)["progress"]["strategies_total"], 2);
  EXPECT_EQ(body(posted)["base_seed"], 3);
  const auto snapshots = waitForTask(c, id);
  ASSERT_EQ(snapshots.back()["status"], "COMPLETED");
  EXPECT_EQ(snapshots.back()["stats"]["crash_count"], 1);
}

TEST(Service, ClientErrors) {
  TempDir dir;
  Running svc(config(dir, 0));
  auto c = svc.client();
  EXPECT_EQ(c.Get("/api/tasks/task-424242")->status, 404);
  EXPECT_EQ(c.Get("/api/crashes/nope/report")->status, 404);
  EXPECT_EQ(c.Get("/api/crashes/nope/script")->status, 404);

  auto items = upload("two_screen_login", R"("all")");
  items[0].content = R"({"app": {"id": "x"}})";
  auto bad_model = c.Post("/api/tasks", items);
  ASSERT_EQ(bad_model->status, 400);
  EXPECT_EQ(body(bad_model)["path"].get<std::string>().rfind("app_model", 0), 0u)
      << bad_model->body;

  auto bad_strategy = c.Post("/api/tasks", upload("two_screen_login", R"(["TOP_DOWN,NONE"])"));
  ASSERT_EQ(bad_strategy->status, 400);
  EXPECT_EQ(body(bad_strategy)["path"], "strategies[0]");
  EXPECT_EQ(c.Post("/api/tasks", upload("two_screen_login", "[]"))->status, 400);
  EXPECT_EQ(c.Post("/api/tasks", "{", "application/json")->status, 400);

  httplib::MultipartFormDataItems missing = upload("two_screen_login", R"("all")");
  missing.erase(missing.begin() + 1);
  auto no_ir = c.Post("/api/tasks", missing);
  ASSERT_EQ(no_ir->status, 400);
  EXPECT_EQ(body(no_ir)["path"], "app_ir");
}

TEST(Service, ZeroWorkersLeavesTasksQueued) {
  TempDir dir;
  Running svc(config(dir, 0));
  auto c = svc.client();
  auto posted = c.Post("/api/tasks", upload("two_screen_login", R"("all")"));
  ASSERT_EQ(posted->status, 201);
  std::this_thread::sleep_for(200ms);
  EXPECT_EQ(body(c.Get("/api/tasks/" + body(posted)["task_id"].get<std::string>()))["status"],
            "QUEUED");
}

TEST(Service, OrphanedTaskIsRecoveredAtStartup) {
  TempDir dir;
  auto now = std::make_shared<std::atomic<std::int64_t>>(5000);
  ServiceConfig cfg = config(dir);
  cfg.store_options.now = [now] { return now->load(); };
  std::string id;
  {
    // A worker claims the task and dies before finishing.
    Store store(cfg.store, cfg.store_options);
    TaskDoc t;
    store.putApp(testing::readJson(fixturesDir() / "two_screen_login.model.json"),
                 testing::readJson(fixturesDir() / "two_screen_login.ir.json"), t);
    t.strategies = {parseStrategy("TOP_DOWN,NONE,NORMAL")};
    id = store.enqueueTask(t);
    ASSERT_TRUE(store.pollTask().has_value());
  }
  *now += 601;
  Running svc(cfg);
  auto c = svc.client();
  const auto snapshots = waitForTask(c, id);
  ASSERT_FALSE(snapshots.empty());
  EXPECT_EQ(snapshots.back()["status"], "COMPLETED");
  EXPECT_EQ(snapshots.back()["attempts"], 2);
}

TEST(Service, StoreFailureIs503) {
  TempDir dir;
  Running svc(config(dir, 0));
  auto c = svc.client();
  std::filesystem::remove_all(dir / "store" / "tasks");
  std::ofstream(dir / "store" / "tasks") << "not a directory";
  auto r = c.Post("/api/tasks", upload("two_screen_login", R"("all")"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 503) << r->body;
}

TEST(Service, RootServesPlaceholderOrBundle) {
  TempDir dir;
  {
    Running svc(config(dir, 0));
    auto r = svc.client().Get("/");
    ASSERT_EQ(r->status, 200);
    EXPECT_NE(r->body.find("/api/tasks"), std::string::npos);
  }
  std::filesystem::create_directories(dir / "dist");
  std::ofstream(dir / "dist" / "index.html") << "<p>bundle</p>";
  ServiceConfig cfg = config(dir, 0);
  cfg.static_dir = dir / "dist";
  Running svc(cfg);
  auto r = svc.client().Get("/");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(r->body, "<p>bundle</p>");
}

TEST(Service, EnvironmentOverrides) {
  setenv("CRASHSCOPE_STORE", "/tmp/elsewhere", 1);
  setenv("CRASHSCOPE_PORT", "9123", 1);
  setenv("CRASHSCOPE_WORKERS", "0", 1);
  const ServiceConfig c = applyEnvironment(ServiceConfig{});
  EXPECT_EQ(c.store, "/tmp/elsewhere");
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.workers, 0);
  setenv("CRASHSCOPE_PORT", "eighty", 1);
  EXPECT_THROW(applyEnvironment(ServiceConfig{}), ValidationError);
  unsetenv("CRASHSCOPE_STORE");
  unsetenv("CRASHSCOPE_PORT");
  unsetenv("CRASHSCOPE_WORKERS");
}

}  // namespace
}  // namespace crashscope
