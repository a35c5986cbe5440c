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

// Embedded document store and task queue.
//
// Layout under the root directory:
//   store.json                      header (format version, signature hash)
//   <collection>/<id>.<ext>         one document per file, replaced atomically
//   <collection>/index.jsonl        append-only insertion log {id, task_id}
//   <collection>/.lock              cross-process writer lock
//
// Writers serialize per collection (mutex in-process, flock across
// processes). Readers open the document file directly; rename() makes every
// document visible either whole or not at all.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashscope/domain.hpp"
#include "crashscope/ripper.hpp"

namespace crashscope {

enum class Collection { Tasks, Traces, Crashes, Graphs, Screenshots, Reports, Scripts, Apps };

inline constexpr Collection kAllCollections[] = {
    Collection::Tasks,       Collection::Traces,  Collection::Crashes,
    Collection::Graphs,      Collection::Screenshots, Collection::Reports,
    Collection::Scripts,     Collection::Apps};

// Directory name: "tasks", "traces", ...
std::string_view toString(Collection c);
Collection collectionFromString(std::string_view name);

// I/O failure or a corrupt store. The service maps it to 503.
class StoreError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  NotFound(Collection c, std::string id);
  Collection collection() const { return collection_; }
  const std::string& id() const { return id_; }

 private:
  Collection collection_;
  std::string id_;
};

// ---------------------------------------------------------------------------
// Tasks

enum class TaskStatus { Queued, Running, Completed, Failed };
std::string_view toString(TaskStatus s);

struct TaskProgress {
  int strategies_done = 0;
  int strategies_total = 0;
  int events_executed = 0;
  friend bool operator==(const TaskProgress&, const TaskProgress&) = default;
};

struct TaskStats {
  double running_time_s = 0.0;
  int crash_count = 0;
  int unique_crash_count = 0;
  std::string app_name;
  std::string app_version;
  friend bool operator==(const TaskStats&, const TaskStats&) = default;
};

struct TaskDoc {
  std::string task_id;  // assigned by enqueueTask
  std::string app_id;
  // fnv1a-128 of the canonical model and IR documents, stored under apps/
  std::string model_hash;
  std::string ir_hash;
  std::vector<StrategyConfig> strategies;  // empty on enqueue means all 12
  std::uint64_t base_seed = 0;
  ExplorationBudget budget;
  TaskStatus status = TaskStatus::Queued;
  TaskProgress progress;
  TaskStats stats;
  std::optional<std::string> error;
  std::int64_t created_at = 0;  // unix seconds
  std::int64_t updated_at = 0;
  std::optional<std::int64_t> claimed_at;
  int attempts = 0;  // times claimed

  friend bool operator==(const TaskDoc&, const TaskDoc&) = default;
};

void to_json(Json& j, const TaskDoc& t);
void from_json(const Json& j, TaskDoc& t);

// Wall clock in unix seconds; injectable for lease tests.
using Clock = std::function<std::int64_t()>;
std::int64_t systemClock();

struct StoreOptions {
  Clock now = systemClock;
  // RUNNING tasks not updated for this long are presumed orphaned by a dead
  // worker and go back to the queue.
  std::chrono::seconds lease{600};
};

class Store {
 public:
  // Creates the layout if missing. Throws StoreError when the header names a
  // different format or signature hash.
  explicit Store(std::filesystem::path root, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& root() const { return root_; }

  // Stores the app model and IR under apps/ and fills the hashes.
  std::string putApp(const Json& model, const Json& ir, TaskDoc& task);
  Json getAppModel(const TaskDoc& task) const;
  Json getAppIR(const TaskDoc& task) const;

  // Assigns task_id, resets status to QUEUED and progress to zero.
  // Throws ValidationError for unknown app refs or an invalid document.
  std::string enqueueTask(TaskDoc doc);
  // Claims the oldest QUEUED task (status -> RUNNING). Exclusive across
  // threads and processes.
  std::optional<TaskDoc> pollTask();
  TaskDoc getTask(std::string_view id) const;
  std::vector<TaskDoc> listTasks() const;  // enqueue order
  // Persists progress and status changes. Enforces QUEUED -> RUNNING ->
  // {COMPLETED, FAILED} and monotone progress; throws ContractViolation.
  void updateTask(const TaskDoc& doc);
  // Re-queues RUNNING tasks whose lease expired. Returns their ids.
  std::vector<std::string> recoverStaleTasks();

  // JSON documents. Validated against the collection's schema when it has
  // one. Overwriting an id keeps its original index position.
  void putDocument(Collection c, std::string_view id, const Json& doc);
  Json getDocument(Collection c, std::string_view id) const;
  // Raw text files (screenshots, rendered reports, scripts).
  void putText(Collection c, std::string_view id, std::string_view ext,
               std::string_view text, std::string_view task_id = {});
  std::string getText(Collection c, std::string_view id, std::string_view ext) const;
  bool exists(Collection c, std::string_view id, std::string_view ext = "json") const;

  // Insertion order.
  std::vector<std::string> list(Collection c) const;
  std::vector<std::string> listByTask(std::string_view task_id, Collection c) const;

 private:
  struct Lane;
  Lane& lane(Collection c) const;
  std::filesystem::path file(Collection c, std::string_view id,
                             std::string_view ext) const;
  void write(Collection c, std::string_view id, std::string_view ext,
             std::string_view bytes, std::string_view task_id);
  std::vector<std::pair<std::string, std::string>> index(Collection c) const;
  void writeTask(const TaskDoc& doc);

  std::filesystem::path root_;
  StoreOptions options_;
  std::map<Collection, std::unique_ptr<Lane>> lanes_;
};

// Schema name used for documents of a collection, if any.
std::optional<std::string_view> schemaFor(Collection c);

}  // namespace crashscope
