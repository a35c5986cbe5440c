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

#include <atomic>
#include <thread>

#include "crashscope/schema.hpp"
#include "crashscope/store.hpp"
#include "support.hpp"

namespace crashscope {
namespace {

using testing::TempDir;

struct FakeClock {
  std::shared_ptr<std::atomic<std::int64_t>> t = std::make_shared<std::atomic<std::int64_t>>(1000);
  Clock clock() const {
    auto p = t;
    return [p] { return p->load(); };
  }
  void advance(std::int64_t s) { *t += s; }
};

TaskDoc appTask(Store& store, const std::string& app = "two_screen_login") {
  TaskDoc t;
  store.putApp(testing::readJson(testing::fixturesDir() / (app + ".model.json")),
               testing::readJson(testing::fixturesDir() / (app + ".ir.json")), t);
  return t;
}

TEST(Store, EnqueueAssignsIdsAndDefaults) {
  TempDir dir;
  Store store(dir.path());
  TaskDoc t = appTask(store);
  EXPECT_EQ(t.app_id, "two_screen_login");
  EXPECT_EQ(t.model_hash.size(), 32u);
  const std::string a = store.enqueueTask(t);
  const std::string b = store.enqueueTask(t);
  EXPECT_EQ(a, "task-000001");
  EXPECT_EQ(b, "task-000002");
  const TaskDoc got = store.getTask(a);
  EXPECT_EQ(got.status, TaskStatus::Queued);
  EXPECT_EQ(got.strategies.size(), 12u);
  EXPECT_EQ(got.progress.strategies_total, 12);
  EXPECT_TRUE(validateAgainst("task", Json(got)).empty());
  EXPECT_EQ(store.getAppModel(got)["app"]["id"], "two_screen_login");
  EXPECT_THROW(store.getTask("task-999999"), NotFound);
}

TEST(Store, RejectsUnknownAppRef) {
  TempDir dir;
  Store store(dir.path());
  TaskDoc t;
  t.app_id = "ghost";
  t.model_hash = std::string(32, '0');
  t.ir_hash = std::string(32, '0');
  EXPECT_THROW(store.enqueueTask(t), ValidationError);
}

TEST(Store, StatusTransitionsAndMonotoneProgress) {
  TempDir dir;
  Store store(dir.path());
  const std::string id = store.enqueueTask(appTask(store));
  TaskDoc queued = store.getTask(id);
  queued.status = TaskStatus::Completed;
  EXPECT_THROW(store.updateTask(queued), ContractViolation);

  TaskDoc running = *store.pollTask();
  EXPECT_EQ(running.status, TaskStatus::Running);
  EXPECT_EQ(running.attempts, 1);
  EXPECT_FALSE(store.pollTask().has_value());

  running.progress.strategies_done = 3;
  store.updateTask(running);
  TaskDoc backwards = running;
  backwards.progress.strategies_done = 2;
  EXPECT_THROW(store.updateTask(backwards), ContractViolation);

  running.status = TaskStatus::Completed;
  store.updateTask(running);
  TaskDoc again = running;
  again.status = TaskStatus::Running;
  EXPECT_THROW(store.updateTask(again), ContractViolation);
  EXPECT_EQ(store.getTask(id).status, TaskStatus::Completed);
}

TEST(Store, ClaimExclusivityUnderConcurrentPollers) {
  TempDir dir;
  std::vector<std::string> enqueued;
  {
    Store store(dir.path());
    const TaskDoc t = appTask(store);
    for (int i = 0; i < 100; ++i) enqueued.push_back(store.enqueueTask(t));
  }
  // Two handles on one directory, as two worker processes would have.
  Store a(dir.path()), b(dir.path());
  std::vector<std::string> claimed_a, claimed_b;
  auto poller = [](Store& s, std::vector<std::string>& out) {
    for (int i = 0; i < 100; ++i) {
      if (auto t = s.pollTask()) out.push_back(t->task_id);
    }
  };
  std::thread ta(poller, std::ref(a), std::ref(claimed_a));
  std::thread tb(poller, std::ref(b), std::ref(claimed_b));
  ta.join();
  tb.join();
  std::multiset<std::string> all(claimed_a.begin(), claimed_a.end());
  all.insert(claimed_b.begin(), claimed_b.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(std::set<std::string>(all.begin(), all.end()),
            std::set<std::string>(enqueued.begin(), enqueued.end()));
  for (const auto& t : a.listTasks()) {
    EXPECT_EQ(t.status, TaskStatus::Running);
    EXPECT_EQ(t.attempts, 1);
  }
}

TEST(Store, DurableAcrossReopen) {
  TempDir dir;
  std::string id;
  {
    Store store(dir.path());
    id = store.enqueueTask(appTask(store));
    store.putText(Collection::Scripts, "c1", "cscript", "LAUNCH\n", id);
  }
  Store reopened(dir.path());
  EXPECT_EQ(reopened.getTask(id).task_id, id);
  EXPECT_EQ(reopened.getText(Collection::Scripts, "c1", "cscript"), "LAUNCH\n");
  EXPECT_EQ(reopened.listByTask(id, Collection::Scripts), std::vector<std::string>{"c1"});
  EXPECT_EQ(testing::readJson(dir / "store.json")["signature_hash"], "fnv1a-128");
}

TEST(Store, RefusesForeignHeader) {
  TempDir dir;
  { Store store(dir.path()); }
  std::ofstream(dir / "store.json") << R"({"format": 1, "signature_hash": "md5"})";
  EXPECT_THROW(Store{dir.path()}, StoreError);
}

TEST(Store, LeaseRecoveryAfterWorkerDeath) {
  TempDir dir;
  FakeClock clock;
  std::string id;
  {
    Store store(dir.path(), {clock.clock(), std::chrono::seconds(600)});
    id = store.enqueueTask(appTask(store));
    TaskDoc t = *store.pollTask();
    t.progress.strategies_done = 2;
    store.updateTask(t);
    // The worker dies here without finishing.
  }
  clock.advance(599);
  {
    Store store(dir.path(), {clock.clock(), std::chrono::seconds(600)});
    EXPECT_TRUE(store.recoverStaleTasks().empty());
    EXPECT_EQ(store.getTask(id).status, TaskStatus::Running);
  }
  clock.advance(2);
  Store store(dir.path(), {clock.clock(), std::chrono::seconds(600)});
  EXPECT_EQ(store.recoverStaleTasks(), std::vector<std::string>{id});
  const TaskDoc requeued = store.getTask(id);
  EXPECT_EQ(requeued.status, TaskStatus::Queued);
  EXPECT_EQ(requeued.progress.strategies_done, 0);

  TaskDoc second = *store.pollTask();
  EXPECT_EQ(second.attempts, 2);
  // A late write from the first claim is rejected.
  TaskDoc stale = second;
  stale.attempts = 1;
  stale.status = TaskStatus::Completed;
  EXPECT_THROW(store.updateTask(stale), ContractViolation);
}

TEST(Store, DocumentsValidateAgainstSchemas) {
  TempDir dir;
  Store store(dir.path());
  EXPECT_THROW(store.putDocument(Collection::Crashes, "bad", Json{{"crash_id", 3}}), SchemaError);
  EXPECT_THROW(store.getDocument(Collection::Crashes, "missing"), NotFound);
  store.putDocument(Collection::Graphs, "g", Json(TransitionGraph{}));
  store.putDocument(Collection::Graphs, "g", Json(TransitionGraph{}));
  EXPECT_EQ(store.list(Collection::Graphs), std::vector<std::string>{"g"});
  EXPECT_TRUE(store.exists(Collection::Graphs, "g"));
  EXPECT_FALSE(store.exists(Collection::Graphs, "g", "svg"));
  EXPECT_THROW(store.putText(Collection::Scripts, "../escape", "cscript", "x"), ContractViolation);
}

TEST(Store, CollectionNames) {
  for (Collection c : kAllCollections) EXPECT_EQ(collectionFromString(toString(c)), c);
  EXPECT_EQ(toString(Collection::Screenshots), "screenshots");
}

}  // namespace
}  // namespace crashscope
