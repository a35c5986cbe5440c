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

#include "crashscope/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "crashscope/hash.hpp"
#include "crashscope/schema.hpp"

namespace crashscope {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCollectionNames[] = {
    "tasks", "traces", "crashes", "graphs", "screenshots", "reports", "scripts", "apps"};
constexpr std::string_view kTaskStatusNames[] = {"QUEUED", "RUNNING", "COMPLETED",
                                                 "FAILED"};
constexpr int kStoreFormat = 1;

std::string sysError(const std::string& what, const fs::path& p) {
  return what + " " + p.string() + ": " + std::strerror(errno);
}

std::string readFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoreError(sysError("cannot read", p));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool validId(std::string_view id) {
  if (id.empty() || id == "." || id == ".." || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
           c == '.';
  });
}

TaskStatus statusFromString(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kTaskStatusNames); ++i) {
    if (kTaskStatusNames[i] == s) return static_cast<TaskStatus>(i);
  }
  throw ValidationError("status", "unknown task status '" + std::string(s) + "'");
}

}  // namespace

std::string_view toString(Collection c) {
  return kCollectionNames[static_cast<std::size_t>(c)];
}

Collection collectionFromString(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kCollectionNames); ++i) {
    if (kCollectionNames[i] == name) return static_cast<Collection>(i);
  }
  throw ContractViolation("unknown collection '" + std::string(name) + "'");
}

std::string_view toString(TaskStatus s) {
  return kTaskStatusNames[static_cast<std::size_t>(s)];
}

NotFound::NotFound(Collection c, std::string id)
    : Error(std::string(toString(c)) + "/" + id + " not found"),
      collection_(c),
      id_(std::move(id)) {}

std::optional<std::string_view> schemaFor(Collection c) {
  switch (c) {
    case Collection::Tasks: return "task";
    case Collection::Traces: return "trace";
    case Collection::Crashes: return "crash";
    case Collection::Graphs: return "graph";
    case Collection::Reports: return "report";
    default: return std::nullopt;
  }
}

std::int64_t systemClock() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// TaskDoc JSON

void to_json(Json& j, const TaskDoc& t) {
  j = Json{{"task_id", t.task_id},
           {"app_id", t.app_id},
           {"model_hash", t.model_hash},
           {"ir_hash", t.ir_hash},
           {"strategies", t.strategies},
           {"base_seed", t.base_seed},
           {"budget",
            {{"max_events", t.budget.max_events},
             {"max_wall_time_s", t.budget.max_wall_time_s}}},
           {"status", toString(t.status)},
           {"progress",
            {{"strategies_done", t.progress.strategies_done},
             {"strategies_total", t.progress.strategies_total},
             {"events_executed", t.progress.events_executed}}},
           {"stats",
            {{"running_time_s", t.stats.running_time_s},
             {"crash_count", t.stats.crash_count},
             {"unique_crash_count", t.stats.unique_crash_count},
             {"app_name", t.stats.app_name},
             {"app_version", t.stats.app_version}}},
           {"created_at", t.created_at},
           {"updated_at", t.updated_at},
           {"attempts", t.attempts}};
  if (t.error) j["error"] = *t.error;
  if (t.claimed_at) j["claimed_at"] = *t.claimed_at;
}

void from_json(const Json& j, TaskDoc& t) {
  t = TaskDoc();
  t.task_id = j.at("task_id").get<std::string>();
  t.app_id = j.at("app_id").get<std::string>();
  t.model_hash = j.at("model_hash").get<std::string>();
  t.ir_hash = j.at("ir_hash").get<std::string>();
  t.strategies = j.at("strategies").get<std::vector<StrategyConfig>>();
  t.base_seed = j.at("base_seed").get<std::uint64_t>();
  const Json& b = j.at("budget");
  t.budget.max_events = b.at("max_events").get<int>();
  t.budget.max_wall_time_s = b.at("max_wall_time_s").get<double>();
  t.status = statusFromString(j.at("status").get<std::string>());
  const Json& p = j.at("progress");
  t.progress.strategies_done = p.at("strategies_done").get<int>();
  t.progress.strategies_total = p.at("strategies_total").get<int>();
  t.progress.events_executed = p.at("events_executed").get<int>();
  const Json& s = j.at("stats");
  t.stats.running_time_s = s.at("running_time_s").get<double>();
  t.stats.crash_count = s.at("crash_count").get<int>();
  t.stats.unique_crash_count = s.at("unique_crash_count").get<int>();
  t.stats.app_name = s.at("app_name").get<std::string>();
  t.stats.app_version = s.at("app_version").get<std::string>();
  t.created_at = j.at("created_at").get<std::int64_t>();
  t.updated_at = j.at("updated_at").get<std::int64_t>();
  t.attempts = j.at("attempts").get<int>();
  if (j.contains("error")) t.error = j["error"].get<std::string>();
  if (j.contains("claimed_at")) t.claimed_at = j["claimed_at"].get<std::int64_t>();
}

// ---------------------------------------------------------------------------
// Store

struct Store::Lane {
  std::mutex mu;
  fs::path lock_file;
};

namespace {

// Holds the lane mutex and an exclusive flock on the lane's lock file.
class LaneLock {
 public:
  LaneLock(std::mutex& mu, const fs::path& lock_file) : guard_(mu) {
    fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw StoreError(sysError("cannot open", lock_file));
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        throw StoreError(sysError("cannot lock", lock_file));
      }
    }
  }
  ~LaneLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  LaneLock(const LaneLock&) = delete;
  LaneLock& operator=(const LaneLock&) = delete;

 private:
  std::lock_guard<std::mutex> guard_;
  int fd_ = -1;
};

}  // namespace

Store::Store(fs::path root, StoreOptions options)
    : root_(std::move(root)), options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StoreError("cannot create store " + root_.string() + ": " + ec.message());
  for (Collection c : kAllCollections) {
    const fs::path dir = root_ / std::string(toString(c));
    fs::create_directories(dir, ec);
    if (ec) throw StoreError("cannot create " + dir.string() + ": " + ec.message());
    auto lane = std::make_unique<Lane>();
    lane->lock_file = dir / ".lock";
    lanes_.emplace(c, std::move(lane));
  }

  const fs::path header = root_ / "store.json";
  const Json expected{{"format", kStoreFormat},
                      {"signature_hash", std::string(kSignatureHashName)}};
  if (fs::exists(header)) {
    Json have;
    try {
      have = Json::parse(readFile(header));
    } catch (const Json::exception& e) {
      throw StoreError("corrupt store header: " + std::string(e.what()));
    }
    if (have != expected) {
      throw StoreError("store " + root_.string() + " has header " + have.dump() +
                       ", expected " + expected.dump());
    }
  } else {
    LaneLock lock(lane(Collection::Tasks).mu, lane(Collection::Tasks).lock_file);
    if (!fs::exists(header)) {
      const fs::path tmp = root_ / ("store.json.tmp." + std::to_string(::getpid()));
      std::ofstream(tmp) << expected.dump(2) << "\n";
      fs::rename(tmp, header, ec);
      if (ec) throw StoreError("cannot write store header: " + ec.message());
    }
  }
}

Store::~Store() = default;

Store::Lane& Store::lane(Collection c) const { return *lanes_.at(c); }

fs::path Store::file(Collection c, std::string_view id, std::string_view ext) const {
  if (!validId(id)) {
    throw ContractViolation("invalid document id '" + std::string(id) + "'");
  }
  return root_ / std::string(toString(c)) / (std::string(id) + "." + std::string(ext));
}

// Caller holds the lane lock.
void Store::write(Collection c, std::string_view id, std::string_view ext,
                  std::string_view bytes, std::string_view task_id) {
  static std::atomic<unsigned> counter{0};
  const fs::path target = file(c, id, ext);
  const bool fresh = !fs::exists(target);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw StoreError(sysError("cannot write", tmp));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StoreError("cannot publish " + target.string());
  }
  if (fresh) {
    const fs::path idx = root_ / std::string(toString(c)) / "index.jsonl";
    std::ofstream log(idx, std::ios::app | std::ios::binary);
    log << Json{{"id", id}, {"ext", ext}, {"task_id", task_id}}.dump() << "\n";
    log.flush();
    if (!log) throw StoreError(sysError("cannot append", idx));
  }
}

// (id, task_id) in first-insertion order, one entry per id.
std::vector<std::pair<std::string, std::string>> Store::index(Collection c) const {
  std::vector<std::pair<std::string, std::string>> out;
  const fs::path idx = root_ / std::string(toString(c)) / "index.jsonl";
  std::ifstream in(idx);
  if (!in) return out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json e;
    try {
      e = Json::parse(line);
    } catch (const Json::exception&) {
      continue;  // torn tail from a crashed writer
    }
    std::string id = e.value("id", "");
    if (id.empty() || !seen.insert(id).second) continue;
    out.emplace_back(std::move(id), e.value("task_id", ""));
  }
  return out;
}

void Store::putDocument(Collection c, std::string_view id, const Json& doc) {
  if (auto schema = schemaFor(c)) requireValid(*schema, doc);
  const std::string task_id =
      doc.is_object() && doc.contains("task_id") && doc["task_id"].is_string()
          ? doc["task_id"].get<std::string>()
          : std::string();
  Lane& l = lane(c);
  LaneLock lock(l.mu, l.lock_file);
  write(c, id, "json", doc.dump(1) + "\n", task_id);
}

Json Store::getDocument(Collection c, std::string_view id) const {
  const fs::path p = file(c, id, "json");
  if (!fs::exists(p)) throw NotFound(c, std::string(id));
  try {
    return Json::parse(readFile(p));
  } catch (const Json::exception& e) {
    throw StoreError("corrupt document " + p.string() + ": " + e.what());
  }
}

void Store::putText(Collection c, std::string_view id, std::string_view ext,
                    std::string_view text, std::string_view task_id) {
  Lane& l = lane(c);
  LaneLock lock(l.mu, l.lock_file);
  write(c, id, ext, text, task_id);
}

std::string Store::getText(Collection c, std::string_view id,
                           std::string_view ext) const {
  const fs::path p = file(c, id, ext);
  if (!fs::exists(p)) throw NotFound(c, std::string(id) + "." + std::string(ext));
  return readFile(p);
}

bool Store::exists(Collection c, std::string_view id, std::string_view ext) const {
  return validId(id) && fs::exists(file(c, id, ext));
}

std::vector<std::string> Store::list(Collection c) const {
  Lane& l = lane(c);
  std::lock_guard<std::mutex> guard(l.mu);
  std::vector<std::string> out;
  for (auto& [id, task] : index(c)) out.push_back(id);
  return out;
}

std::vector<std::string> Store::listByTask(std::string_view task_id,
                                           Collection c) const {
  Lane& l = lane(c);
  std::lock_guard<std::mutex> guard(l.mu);
  std::vector<std::string> out;
  for (auto& [id, task] : index(c)) {
    if (task == task_id) out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Apps and tasks

std::string Store::putApp(const Json& model, const Json& ir, TaskDoc& task) {
  const std::string model_doc = model.dump();
  const std::string ir_doc = ir.dump();
  task.model_hash = fnv1a128(model_doc).hex();
  task.ir_hash = fnv1a128(ir_doc).hex();
  if (model.contains("app") && model["app"].contains("id")) {
    task.app_id = model["app"]["id"].get<std::string>();
  }
  Lane& l = lane(Collection::Apps);
  LaneLock lock(l.mu, l.lock_file);
  if (!fs::exists(file(Collection::Apps, task.model_hash, "json"))) {
    write(Collection::Apps, task.model_hash, "json", model_doc + "\n", {});
  }
  if (!fs::exists(file(Collection::Apps, task.ir_hash, "json"))) {
    write(Collection::Apps, task.ir_hash, "json", ir_doc + "\n", {});
  }
  return task.model_hash;
}

Json Store::getAppModel(const TaskDoc& task) const {
  return getDocument(Collection::Apps, task.model_hash);
}

Json Store::getAppIR(const TaskDoc& task) const {
  return getDocument(Collection::Apps, task.ir_hash);
}

void Store::writeTask(const TaskDoc& doc) {
  const Json j = doc;
  requireValid("task", j);
  write(Collection::Tasks, doc.task_id, "json", j.dump(1) + "\n", doc.task_id);
}

std::string Store::enqueueTask(TaskDoc doc) {
  if (doc.strategies.empty()) doc.strategies = strategyMatrix();
  if (doc.model_hash.empty() || !exists(Collection::Apps, doc.model_hash)) {
    throw ValidationError("model_hash", "unknown app model '" + doc.model_hash + "'");
  }
  if (doc.ir_hash.empty() || !exists(Collection::Apps, doc.ir_hash)) {
    throw ValidationError("ir_hash", "unknown app IR '" + doc.ir_hash + "'");
  }
  if (doc.budget.max_events < 1 || doc.budget.max_wall_time_s <= 0) {
    throw ValidationError("budget", "budget limits must be positive");
  }
  doc.status = TaskStatus::Queued;
  doc.progress = TaskProgress{0, static_cast<int>(doc.strategies.size()), 0};
  doc.error.reset();
  doc.claimed_at.reset();
  doc.attempts = 0;
  doc.created_at = doc.updated_at = options_.now();

  Lane& l = lane(Collection::Tasks);
  LaneLock lock(l.mu, l.lock_file);
  char id[32];
  std::snprintf(id, sizeof id, "task-%06zu", index(Collection::Tasks).size() + 1);
  doc.task_id = id;
  try {
    writeTask(doc);
  } catch (const SchemaError& e) {
    throw ValidationError(e.path(), e.what());
  }
  return doc.task_id;
}

std::optional<TaskDoc> Store::pollTask() {
  Lane& l = lane(Collection::Tasks);
  LaneLock lock(l.mu, l.lock_file);
  for (auto& [id, task] : index(Collection::Tasks)) {
    TaskDoc doc = getDocument(Collection::Tasks, id).get<TaskDoc>();
    if (doc.status != TaskStatus::Queued) continue;
    doc.status = TaskStatus::Running;
    doc.claimed_at = doc.updated_at = options_.now();
    ++doc.attempts;
    writeTask(doc);
    return doc;
  }
  return std::nullopt;
}

TaskDoc Store::getTask(std::string_view id) const {
  return getDocument(Collection::Tasks, id).get<TaskDoc>();
}

std::vector<TaskDoc> Store::listTasks() const {
  std::vector<TaskDoc> out;
  for (const auto& id : list(Collection::Tasks)) out.push_back(getTask(id));
  return out;
}

void Store::updateTask(const TaskDoc& doc) {
  Lane& l = lane(Collection::Tasks);
  LaneLock lock(l.mu, l.lock_file);
  const TaskDoc cur = getDocument(Collection::Tasks, doc.task_id).get<TaskDoc>();
  const bool allowed =
      doc.status == cur.status ||
      (cur.status == TaskStatus::Queued && doc.status == TaskStatus::Running) ||
      (cur.status == TaskStatus::Running &&
       (doc.status == TaskStatus::Completed || doc.status == TaskStatus::Failed));
  if (!allowed) {
    throw ContractViolation("task " + doc.task_id + ": illegal transition " +
                            std::string(toString(cur.status)) + " -> " +
                            std::string(toString(doc.status)));
  }
  if (cur.status == TaskStatus::Completed || cur.status == TaskStatus::Failed) {
    throw ContractViolation("task " + doc.task_id + " is already final");
  }
  if (doc.progress.strategies_done < cur.progress.strategies_done ||
      doc.progress.events_executed < cur.progress.events_executed) {
    throw ContractViolation("task " + doc.task_id + ": progress must not decrease");
  }
  if (doc.attempts != cur.attempts) {
    // A stale worker lost its lease and the task was claimed again.
    throw ContractViolation("task " + doc.task_id + " was reclaimed");
  }
  TaskDoc next = doc;
  next.created_at = cur.created_at;
  next.updated_at = options_.now();
  writeTask(next);
}

std::vector<std::string> Store::recoverStaleTasks() {
  Lane& l = lane(Collection::Tasks);
  LaneLock lock(l.mu, l.lock_file);
  const std::int64_t now = options_.now();
  std::vector<std::string> out;
  for (auto& [id, task] : index(Collection::Tasks)) {
    TaskDoc doc = getDocument(Collection::Tasks, id).get<TaskDoc>();
    if (doc.status != TaskStatus::Running) continue;
    // updated_at doubles as the worker heartbeat.
    if (now - doc.updated_at < options_.lease.count()) continue;
    doc.status = TaskStatus::Queued;
    doc.progress.strategies_done = 0;
    doc.progress.events_executed = 0;
    doc.claimed_at.reset();
    doc.updated_at = now;
    writeTask(doc);
    out.push_back(id);
  }
  return out;
}

}  // namespace crashscope
