#include "buildmgr/store.hpp"

#include <sqlite3.h>
#include <unistd.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"
#include "buildmgr/json_codec.hpp"
#include "buildmgr/log_format.hpp"

namespace buildmgr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(CancelOutcome c) {
  switch (c) {
    case CancelOutcome::Dequeued: return "dequeued";
    case CancelOutcome::CancelRequested: return "cancel_requested";
    case CancelOutcome::NotFound: return "not_found";
  }
  return "not_found";
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS task_uuids (uuid TEXT PRIMARY KEY);
CREATE TABLE IF NOT EXISTS tasks (
  uuid TEXT PRIMARY KEY,
  kind TEXT NOT NULL,
  config TEXT NOT NULL,
  submitted_at INTEGER NOT NULL,
  submitter TEXT,
  description TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS jobs (
  name TEXT PRIMARY KEY,
  kind TEXT NOT NULL,
  serial INTEGER NOT NULL,
  task_uuid TEXT NOT NULL UNIQUE,
  config TEXT NOT NULL,
  hosts TEXT NOT NULL,
  started_at INTEGER NOT NULL,
  status TEXT NOT NULL,
  interrupting_since INTEGER,
  cancel_requested INTEGER NOT NULL,
  cause TEXT NOT NULL,
  log_path TEXT NOT NULL,
  description TEXT NOT NULL,
  submitter TEXT);
CREATE TABLE IF NOT EXISTS results (
  name TEXT PRIMARY KEY,
  kind TEXT NOT NULL,
  serial INTEGER NOT NULL,
  status TEXT NOT NULL,
  revisions TEXT NOT NULL,
  started_at INTEGER NOT NULL,
  finished_at INTEGER NOT NULL,
  log_ref TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS serials (kind TEXT PRIMARY KEY, max_serial INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS seen_revisions (component TEXT PRIMARY KEY, revision TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS schedule (ci_job TEXT PRIMARY KEY, last_fired INTEGER NOT NULL);
)sql";

constexpr const char* kTables[] = {"meta",    "task_uuids", "tasks",          "jobs",
                                   "results", "serials",    "seen_revisions", "schedule"};

[[noreturn]] void db_fail(sqlite3* db, const std::string& what) {
  const int rc = sqlite3_errcode(db);
  const auto code = (rc == SQLITE_BUSY || rc == SQLITE_LOCKED || rc == SQLITE_CANTOPEN)
                        ? ErrorCode::ConnectionFailed
                        : ErrorCode::Io;
  throw Error(code, what + ": " + sqlite3_errmsg(db));
}

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    const int rc = sqlite3_errcode(db);
    throw Error(rc == SQLITE_BUSY || rc == SQLITE_LOCKED ? ErrorCode::ConnectionFailed
                                                         : ErrorCode::Io,
                std::string(sql).substr(0, 40) + ": " + msg);
  }
}

// Prepared statements are kept per connection and reused; parsing the SQL
// otherwise dominates the cost of small queries.
struct StatementPool {
  std::mutex mutex;
  std::map<sqlite3*, std::multimap<std::string, sqlite3_stmt*>> idle;

  static StatementPool& instance() {
    static StatementPool pool;
    return pool;
  }

  sqlite3_stmt* take(sqlite3* db, const char* sql) {
    {
      std::lock_guard lock(mutex);
      auto& stmts = idle[db];
      if (auto it = stmts.find(sql); it != stmts.end()) {
        auto* stmt = it->second;
        stmts.erase(it);
        return stmt;
      }
    }
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db, sql, -1, &stmt, nullptr) != SQLITE_OK) db_fail(db, sql);
    return stmt;
  }

  void give_back(sqlite3* db, sqlite3_stmt* stmt) {
    sqlite3_reset(stmt);
    sqlite3_clear_bindings(stmt);
    std::lock_guard lock(mutex);
    idle[db].emplace(sqlite3_sql(stmt), stmt);
  }

  // Before closing the connection.
  void forget(sqlite3* db) {
    std::lock_guard lock(mutex);
    auto it = idle.find(db);
    if (it == idle.end()) return;
    for (auto& [sql, stmt] : it->second) sqlite3_finalize(stmt);
    idle.erase(it);
  }
};

void close_db(sqlite3* db) {
  StatementPool::instance().forget(db);
  sqlite3_close(db);
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql)
      : db_(db), stmt_(StatementPool::instance().take(db, sql)) {}
  ~Statement() { StatementPool::instance().give_back(db_, stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, std::string_view v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, const std::string& v) { return bind(i, std::string_view(v)); }
  Statement& bind(int i, const char* v) { return bind(i, std::string_view(v)); }
  Statement& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Statement& bind(int i, const std::optional<std::string>& v) {
    if (v) return bind(i, std::string_view(*v));
    sqlite3_bind_null(stmt_, i);
    return *this;
  }
  Statement& bind(int i, std::optional<std::int64_t> v) {
    if (v) return bind(i, *v);
    sqlite3_bind_null(stmt_, i);
    return *this;
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    db_fail(db_, sqlite3_sql(stmt_));
  }
  void run() {
    while (step()) {
    }
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p),
                           static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::optional<std::string> opt_text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return text(col);
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::optional<std::int64_t> opt_integer(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return integer(col);
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

std::int64_t secs(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp from_secs(std::int64_t s) { return Timestamp(std::chrono::seconds(s)); }

Uuid uuid_from_text(const std::string& text) {
  auto u = Uuid::parse(text);
  if (!u) throw Error(ErrorCode::Io, "corrupt uuid in store: " + text);
  return *u;
}

JobStatus job_status_from_text(const std::string& s) {
  if (s == "running") return JobStatus::Running;
  if (s == "interrupting") return JobStatus::Interrupting;
  return JobStatus::Finished;
}

EscalationCause cause_from_text(const std::string& s) {
  if (s == "cancel") return EscalationCause::Cancel;
  if (s == "timeout") return EscalationCause::Timeout;
  return EscalationCause::None;
}

constexpr const char* kTaskColumns =
    "SELECT uuid, config, submitted_at, submitter, description FROM tasks";

Task read_task(const Statement& st) {
  Task t;
  t.uuid = uuid_from_text(st.text(0));
  t.config = config_from_json(json::parse(st.text(1)));
  t.submitted_at = from_secs(st.integer(2));
  t.submitter = st.opt_text(3);
  t.description = st.text(4);
  return t;
}

constexpr const char* kJobColumns =
    "SELECT name, task_uuid, config, hosts, started_at, status, interrupting_since, "
    "cancel_requested, cause, log_path, description, submitter FROM jobs";

Job read_job(const Statement& st) {
  Job j;
  auto name = JobName::parse(st.text(0));
  if (!name) throw Error(ErrorCode::Io, "corrupt job name in store");
  j.name = *name;
  j.task_uuid = uuid_from_text(st.text(1));
  j.config = config_from_json(json::parse(st.text(2)));
  j.hosts = json::parse(st.text(3)).get<std::vector<std::string>>();
  j.started_at = from_secs(st.integer(4));
  j.status = job_status_from_text(st.text(5));
  if (auto since = st.opt_integer(6)) j.interrupting_since = from_secs(*since);
  j.cancel_requested = st.integer(7) != 0;
  j.cause = cause_from_text(st.text(8));
  j.log_path = st.text(9);
  j.description = st.text(10);
  j.submitter = st.opt_text(11);
  return j;
}

constexpr const char* kResultColumns =
    "SELECT name, status, revisions, started_at, finished_at, log_ref FROM results";

Result read_result(const Statement& st) {
  Result r;
  auto name = JobName::parse(st.text(0));
  auto status = parse_result_status(st.text(1));
  if (!name || !status) throw Error(ErrorCode::Io, "corrupt result row in store");
  r.name = *name;
  r.status = *status;
  r.component_revisions = json::parse(st.text(2)).get<std::map<std::string, std::string>>();
  r.started_at = from_secs(st.integer(3));
  r.finished_at = from_secs(st.integer(4));
  r.log_ref = st.text(5);
  return r;
}

void insert_result(sqlite3* db, const Result& r, bool replace) {
  Statement st(db, replace ? "INSERT OR REPLACE INTO results VALUES (?,?,?,?,?,?,?,?)"
                           : "INSERT INTO results VALUES (?,?,?,?,?,?,?,?)");
  st.bind(1, r.name.str())
      .bind(2, r.name.kind.str())
      .bind(3, r.name.serial)
      .bind(4, to_string(r.status))
      .bind(5, json(r.component_revisions).dump())
      .bind(6, secs(r.started_at))
      .bind(7, secs(r.finished_at))
      .bind(8, r.log_ref);
  st.run();
}

void insert_task(sqlite3* db, const Task& task) {
  {
    Statement st(db, "INSERT OR IGNORE INTO task_uuids VALUES (?)");
    st.bind(1, task.uuid.str()).run();
    if (sqlite3_changes(db) == 0) {
      throw Error(ErrorCode::DuplicateUuid, task.uuid.str());
    }
  }
  Statement st(db, "INSERT INTO tasks VALUES (?,?,?,?,?,?)");
  st.bind(1, task.uuid.str())
      .bind(2, task.config.kind.str())
      .bind(3, config_to_json(task.config).dump())
      .bind(4, secs(task.submitted_at))
      .bind(5, task.submitter)
      .bind(6, task.description);
  st.run();
}

}  // namespace

// Holds the store mutex and an IMMEDIATE (write-locking) SQLite transaction;
// rolls back unless committed.
class Store::Transaction {
 public:
  Transaction(Store& store, bool write) : store_(store), lock_(store.mutex_) {
    exec(store_.db_, write ? "BEGIN IMMEDIATE" : "BEGIN DEFERRED");
  }
  ~Transaction() {
    if (!done_) sqlite3_exec(store_.db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    store_.fault_point("commit");
    exec(store_.db_, "COMMIT");
    done_ = true;
  }
  sqlite3* db() const { return store_.db_; }

 private:
  Store& store_;
  std::lock_guard<std::mutex> lock_;
  bool done_ = false;
};

Store::Store(StoreConfig config, OpenMode mode) : config_(std::move(config)) {
  for (const auto& dir : {config_.log_dir, config_.sync_dir}) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir) || ::access(dir.c_str(), W_OK) != 0) {
      throw Error(ErrorCode::ConfigError, "directory not writable: " + dir.string());
    }
  }
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(config_.connection.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    close_db(db_);
    db_ = nullptr;
    throw Error(ErrorCode::ConnectionFailed, config_.connection + ": " + msg);
  }
  try {
    sqlite3_busy_timeout(db_, 10000);
    exec(db_, "PRAGMA journal_mode=WAL");
    exec(db_, "PRAGMA synchronous=NORMAL");
    if (mode == OpenMode::Discard) {
      drop_schema();
    }
    create_schema();
  } catch (...) {
    close_db(db_);
    db_ = nullptr;
    throw;
  }
}

Store::~Store() {
  if (db_) close_db(db_);
}

void Store::create_schema() {
  Transaction tx(*this, true);
  exec(db_, kSchema);
  Statement get(db_, "SELECT value FROM meta WHERE key = 'schema_version'");
  if (get.step()) {
    if (get.text(0) != std::to_string(kSchemaVersion)) {
      throw Error(ErrorCode::SchemaMismatch,
                  "store has schema version " + get.text(0) + ", expected " +
                      std::to_string(kSchemaVersion) + "; rebuild it from the logs (rebuild-db)");
    }
  } else {
    Statement put(db_, "INSERT INTO meta VALUES ('schema_version', ?)");
    put.bind(1, std::to_string(kSchemaVersion)).run();
  }
  tx.commit();
}

void Store::drop_schema() {
  Transaction tx(*this, true);
  for (const char* table : kTables) {
    exec(db_, (std::string("DROP TABLE IF EXISTS ") + table).c_str());
  }
  tx.commit();
}

void Store::discard() {
  drop_schema();
  create_schema();
}

void Store::set_fault_hook(std::function<void(std::string_view)> hook) {
  std::lock_guard lock(mutex_);
  fault_hook_ = std::move(hook);
}

void Store::fault_point(std::string_view where) {
  if (fault_hook_) fault_hook_(where);
}

void Store::enqueue_task(const Task& task) {
  Transaction tx(*this, true);
  insert_task(db_, task);
  fault_point("enqueue");
  tx.commit();
}

PollOutcome Store::commit_poll(const PollCommit& commit) {
  Transaction tx(*this, true);
  PollOutcome outcome;
  for (const auto& task : commit.tasks) {
    std::optional<std::string> queued_uuid;
    std::string old_description;
    if (!task.config.kind.is_user()) {
      Statement find(db_,
                     "SELECT uuid, description FROM tasks WHERE kind = ? "
                     "ORDER BY submitted_at, uuid LIMIT 1");
      find.bind(1, task.config.kind.str());
      if (find.step()) {
        queued_uuid = find.text(0);
        old_description = find.text(1);
      }
    }
    if (queued_uuid) {
      std::string description = old_description;
      if (!description.empty() && !task.description.empty()) description += "\n";
      description += task.description;
      Statement st(db_, "UPDATE tasks SET config = ?, description = ? WHERE uuid = ?");
      st.bind(1, config_to_json(task.config).dump()).bind(2, description).bind(3, *queued_uuid);
      st.run();
      ++outcome.repinned;
    } else {
      insert_task(db_, task);
      ++outcome.enqueued;
    }
    fault_point("poll-task");
  }
  for (const auto& [component, rev] : commit.seen_updates) {
    Statement st(db_, "INSERT OR REPLACE INTO seen_revisions VALUES (?, ?)");
    st.bind(1, component).bind(2, rev).run();
  }
  tx.commit();
  return outcome;
}

void Store::commit_fire(const Task& task, const std::string& ci_job, Timestamp slot) {
  Transaction tx(*this, true);
  insert_task(db_, task);
  fault_point("fire");
  Statement st(db_,
               "INSERT INTO schedule VALUES (?, ?) ON CONFLICT(ci_job) DO UPDATE SET "
               "last_fired = max(last_fired, excluded.last_fired)");
  st.bind(1, ci_job).bind(2, secs(slot)).run();
  tx.commit();
}

void Store::set_last_fired(const std::string& ci_job, Timestamp slot) {
  Transaction tx(*this, true);
  Statement st(db_,
               "INSERT INTO schedule VALUES (?, ?) ON CONFLICT(ci_job) DO UPDATE SET "
               "last_fired = max(last_fired, excluded.last_fired)");
  st.bind(1, ci_job).bind(2, secs(slot)).run();
  tx.commit();
}

std::map<std::string, Timestamp> Store::schedule_state() {
  Transaction tx(*this, false);
  std::map<std::string, Timestamp> out;
  Statement st(db_, "SELECT ci_job, last_fired FROM schedule");
  while (st.step()) out[st.text(0)] = from_secs(st.integer(1));
  tx.commit();
  return out;
}

std::map<std::string, std::string> Store::seen_revisions() {
  Transaction tx(*this, false);
  std::map<std::string, std::string> out;
  Statement st(db_, "SELECT component, revision FROM seen_revisions");
  while (st.step()) out[st.text(0)] = st.text(1);
  tx.commit();
  return out;
}

std::int64_t Store::max_serial(const BuildKind& kind) {
  Transaction tx(*this, false);
  Statement st(db_, "SELECT max_serial FROM serials WHERE kind = ?");
  st.bind(1, kind.str());
  const std::int64_t max = st.step() ? st.integer(0) : 0;
  tx.commit();
  return max;
}

Job Store::claim_task(const Uuid& task_uuid, const JobName& name,
                      const std::vector<std::string>& hosts, Timestamp started_at,
                      const std::string& log_path) {
  Transaction tx(*this, true);
  Statement find(db_, (std::string(kTaskColumns) + " WHERE uuid = ?").c_str());
  find.bind(1, task_uuid.str());
  if (!find.step()) throw Error(ErrorCode::AlreadyClaimed, task_uuid.str());
  const Task task = read_task(find);
  if (task.config.kind != name.kind) {
    throw Error(ErrorCode::InvalidArgument, "job name kind differs from task kind");
  }

  Statement serial(db_, "SELECT max_serial FROM serials WHERE kind = ?");
  serial.bind(1, name.kind.str());
  const std::int64_t max = serial.step() ? serial.integer(0) : 0;
  if (name.serial != max + 1) {
    throw Error(ErrorCode::StaleSerial,
                name.str() + " is not next (max serial " + std::to_string(max) + ")");
  }

  Statement del(db_, "DELETE FROM tasks WHERE uuid = ?");
  del.bind(1, task_uuid.str()).run();
  fault_point("claim-dequeued");

  Job job;
  job.name = name;
  job.task_uuid = task_uuid;
  job.config = task.config;
  job.hosts = hosts;
  job.started_at = started_at;
  job.log_path = log_path;
  job.description = task.description;
  job.submitter = task.submitter;

  Statement ins(db_, "INSERT INTO jobs VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
  ins.bind(1, name.str())
      .bind(2, name.kind.str())
      .bind(3, name.serial)
      .bind(4, task_uuid.str())
      .bind(5, config_to_json(job.config).dump())
      .bind(6, json(hosts).dump())
      .bind(7, secs(started_at))
      .bind(8, to_string(JobStatus::Running))
      .bind(9, std::optional<std::int64_t>())
      .bind(10, std::int64_t{0})
      .bind(11, to_string(EscalationCause::None))
      .bind(12, log_path)
      .bind(13, job.description)
      .bind(14, job.submitter);
  ins.run();

  Statement up(db_,
               "INSERT INTO serials VALUES (?, ?) ON CONFLICT(kind) DO UPDATE SET "
               "max_serial = excluded.max_serial");
  up.bind(1, name.kind.str()).bind(2, name.serial).run();
  tx.commit();
  return job;
}

CancelOutcome Store::request_cancel(const Uuid& uuid) {
  Transaction tx(*this, true);
  Statement del(db_, "DELETE FROM tasks WHERE uuid = ?");
  del.bind(1, uuid.str()).run();
  if (sqlite3_changes(db_) > 0) {
    tx.commit();
    return CancelOutcome::Dequeued;
  }
  Statement up(db_,
               "UPDATE jobs SET cancel_requested = 1 WHERE task_uuid = ? AND status != 'finished'");
  up.bind(1, uuid.str()).run();
  const bool flagged = sqlite3_changes(db_) > 0;
  tx.commit();
  return flagged ? CancelOutcome::CancelRequested : CancelOutcome::NotFound;
}

void Store::mark_interrupting(const JobName& name, Timestamp since, EscalationCause cause) {
  Transaction tx(*this, true);
  Statement st(db_,
               "UPDATE jobs SET status = 'interrupting', interrupting_since = ?, cause = ? "
               "WHERE name = ? AND status = 'running'");
  st.bind(1, secs(since)).bind(2, to_string(cause)).bind(3, name.str()).run();
  tx.commit();
}

void Store::finalize(const JobName& name, const Result& result) {
  if (result.name != name) throw Error(ErrorCode::InvalidArgument, "result name mismatch");
  Transaction tx(*this, true);
  Statement find(db_, "SELECT status FROM jobs WHERE name = ?");
  find.bind(1, name.str());
  if (!find.step() || find.text(0) == "finished") {
    throw Error(ErrorCode::AlreadyFinalized, name.str());
  }
  if (result.log_ref.empty() || !fs::is_regular_file(config_.log_dir / result.log_ref)) {
    throw Error(ErrorCode::MissingLog, (config_.log_dir / result.log_ref).string());
  }
  insert_result(db_, result, false);
  fault_point("finalize-result");
  Statement up(db_, "UPDATE jobs SET status = 'finished' WHERE name = ?");
  up.bind(1, name.str()).run();
  tx.commit();
}

RebuildReport Store::rebuild_from_logs(const fs::path& log_dir) {
  if (!fs::is_directory(log_dir)) throw Error(ErrorCode::LogDirMissing, log_dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(log_dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().ends_with(".log.gz")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  RebuildReport report;
  std::vector<Result> recovered;
  std::set<JobName> names;
  for (const auto& file : files) {
    try {
      auto meta = parse_log_meta(gunzip(read_file(file)));
      if (!names.insert(meta.name).second) {
        ++report.files_skipped;  // two logs claim the same build
        continue;
      }
      recovered.push_back(
          result_from_meta(meta, fs::relative(file, log_dir).generic_string()));
    } catch (const Error&) {
      ++report.files_skipped;
    }
  }

  Transaction tx(*this, true);
  std::map<std::string, std::int64_t> max_serials;
  for (const auto& r : recovered) {
    insert_result(db_, r, true);
    auto& m = max_serials[r.name.kind.str()];
    m = std::max(m, r.name.serial);
  }
  for (const auto& [kind, max] : max_serials) {
    Statement st(db_,
                 "INSERT INTO serials VALUES (?, ?) ON CONFLICT(kind) DO UPDATE SET "
                 "max_serial = max(max_serial, excluded.max_serial)");
    st.bind(1, kind).bind(2, max).run();
  }
  tx.commit();
  report.results_recovered = recovered.size();
  return report;
}

SystemState Store::snapshot() {
  Transaction tx(*this, false);
  SystemState state;
  {
    Statement st(db_, (std::string(kTaskColumns) + " ORDER BY submitted_at, uuid").c_str());
    while (st.step()) state.queue.push_back(read_task(st));
  }
  {
    Statement st(db_, (std::string(kJobColumns) +
                       " WHERE status != 'finished' ORDER BY started_at, kind, serial")
                          .c_str());
    while (st.step()) state.running.push_back(read_job(st));
  }
  {
    Statement st(db_, (std::string(kResultColumns) +
                       " ORDER BY finished_at DESC, started_at DESC, kind, serial DESC")
                          .c_str());
    while (st.step()) state.results.push_back(read_result(st));
  }
  {
    Statement st(db_, "SELECT component, revision FROM seen_revisions");
    while (st.step()) state.seen_revisions[st.text(0)] = st.text(1);
  }
  tx.commit();
  return state;
}

std::optional<Task> Store::find_task(const Uuid& uuid) {
  Transaction tx(*this, false);
  Statement st(db_, (std::string(kTaskColumns) + " WHERE uuid = ?").c_str());
  st.bind(1, uuid.str());
  std::optional<Task> out;
  if (st.step()) out = read_task(st);
  return out;
}

bool Store::known_uuid(const Uuid& uuid) {
  Transaction tx(*this, false);
  Statement st(db_, "SELECT 1 FROM task_uuids WHERE uuid = ?");
  st.bind(1, uuid.str());
  return st.step();
}

std::optional<Job> Store::find_job(const Uuid& task_uuid) {
  Transaction tx(*this, false);
  Statement st(db_, (std::string(kJobColumns) + " WHERE task_uuid = ?").c_str());
  st.bind(1, task_uuid.str());
  std::optional<Job> out;
  if (st.step()) out = read_job(st);
  return out;
}

std::optional<Job> Store::find_job(const JobName& name) {
  Transaction tx(*this, false);
  Statement st(db_, (std::string(kJobColumns) + " WHERE name = ?").c_str());
  st.bind(1, name.str());
  std::optional<Job> out;
  if (st.step()) out = read_job(st);
  return out;
}

std::optional<Result> Store::find_result(const JobName& name) {
  Transaction tx(*this, false);
  Statement st(db_, (std::string(kResultColumns) + " WHERE name = ?").c_str());
  st.bind(1, name.str());
  std::optional<Result> out;
  if (st.step()) out = read_result(st);
  return out;
}

std::vector<Job> Store::active_jobs() { return snapshot().running; }
std::vector<Task> Store::queued_tasks() { return snapshot().queue; }
std::vector<Result> Store::results() { return snapshot().results; }

}  // namespace buildmgr
