#pragma once

// Transactional shared state for the service's loops and for external
// clients (the submit and rebuild tools). Backed by SQLite; every public
// operation is a single serializable transaction.

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

#include "buildmgr/core_model.hpp"

struct sqlite3;

namespace buildmgr {

struct StoreConfig {
  // SQLite database file, or ":memory:".
  std::string connection;
  std::filesystem::path log_dir;
  std::filesystem::path sync_dir;
};

inline constexpr int kSchemaVersion = 1;

enum class OpenMode {
  Normal,
  // Drop every table and recreate the schema; used before a rebuild.
  Discard,
};

enum class CancelOutcome { Dequeued, CancelRequested, NotFound };

std::string_view to_string(CancelOutcome c);

struct RebuildReport {
  std::size_t results_recovered = 0;
  std::size_t files_skipped = 0;
};

struct SystemState {
  std::vector<Task> queue;     // by submission time
  std::vector<Job> running;    // every non-finished job
  std::vector<Result> results; // newest first
  std::map<std::string, std::string> seen_revisions;
  // Configured hosts; not stored, filled in by whoever owns the host list.
  std::vector<Host> hosts;

  bool operator==(const SystemState&) const = default;
};

// Pending poller output applied atomically: new or re-pinned CI tasks plus the
// revisions that triggered them.
struct PollCommit {
  std::vector<Task> tasks;
  std::map<std::string, std::string> seen_updates;
};

struct PollOutcome {
  std::size_t enqueued = 0;
  std::size_t repinned = 0;
};

class Store {
 public:
  // Throws ConnectionFailed, SchemaMismatch, ConfigError (unusable directories).
  explicit Store(StoreConfig config, OpenMode mode = OpenMode::Normal);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const StoreConfig& config() const { return config_; }

  // Throws DuplicateUuid if the uuid was ever enqueued before.
  void enqueue_task(const Task& task);

  // For each task: if a task of the same CI kind is still queued, re-pin it to
  // the new config (keeping its uuid and queue position); else enqueue it.
  // Seen revisions are updated in the same transaction.
  PollOutcome commit_poll(const PollCommit& commit);

  // Enqueue a scheduled task and advance that job's last-fired instant.
  void commit_fire(const Task& task, const std::string& ci_job, Timestamp slot);
  // Records a last-fired instant without enqueueing (first sighting of a job).
  void set_last_fired(const std::string& ci_job, Timestamp slot);
  std::map<std::string, Timestamp> schedule_state();

  std::map<std::string, std::string> seen_revisions();

  std::int64_t max_serial(const BuildKind& kind);

  // Throws AlreadyClaimed (task not queued) or StaleSerial (name not next).
  Job claim_task(const Uuid& task_uuid, const JobName& name, const std::vector<std::string>& hosts,
                 Timestamp started_at, const std::string& log_path);

  CancelOutcome request_cancel(const Uuid& uuid);

  // Running -> Interrupting; no-op for other states.
  void mark_interrupting(const JobName& name, Timestamp since, EscalationCause cause);

  // Throws MissingLog if log_dir/result.log_ref is absent, AlreadyFinalized if
  // the job is not active.
  void finalize(const JobName& name, const Result& result);

  // Throws LogDirMissing.
  RebuildReport rebuild_from_logs(const std::filesystem::path& log_dir);

  // Drops all state and recreates an empty schema.
  void discard();

  SystemState snapshot();

  std::optional<Task> find_task(const Uuid& uuid);
  // Whether the uuid was ever enqueued (until the next rebuild).
  bool known_uuid(const Uuid& uuid);
  // Includes finished jobs; their uuid mapping lives until the next rebuild.
  std::optional<Job> find_job(const Uuid& task_uuid);
  std::optional<Job> find_job(const JobName& name);
  std::optional<Result> find_result(const JobName& name);
  std::vector<Job> active_jobs();
  std::vector<Task> queued_tasks();
  std::vector<Result> results();

  // Test hook, invoked at named points inside write transactions; throwing
  // from it aborts the transaction.
  void set_fault_hook(std::function<void(std::string_view)> hook);

 private:
  class Transaction;
  friend class Transaction;

  void create_schema();
  void drop_schema();
  void fault_point(std::string_view where);

  StoreConfig config_;
  sqlite3* db_ = nullptr;
  std::mutex mutex_;
  std::function<void(std::string_view)> fault_hook_;
};

}  // namespace buildmgr
