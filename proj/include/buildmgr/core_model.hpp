#pragma once

// Domain types and the pure scheduling decisions shared by every part of the
// build manager. Nothing in here performs I/O.

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "buildmgr/time.hpp"
#include "buildmgr/uuid.hpp"

namespace buildmgr {

// [A-Za-z0-9_.-]+
bool is_identifier(std::string_view text);

// 12 to 40 lowercase hex characters.
bool is_revision_hash(std::string_view text);

class ComponentName {
 public:
  // Throws Error(InvalidArgument) unless `name` is an identifier.
  explicit ComponentName(std::string name);

  const std::string& str() const { return name_; }
  auto operator<=>(const ComponentName&) const = default;

 private:
  std::string name_;
};

struct RepoRev {
  std::string hash;
  bool operator==(const RepoRev&) const = default;
};

// A file tree previously uploaded under the shared sync directory.
struct SyncedCopy {
  std::string id;
  bool operator==(const SyncedCopy&) const = default;
};

// Symbolic "current tip"; only legal in CI job templates, resolved before a
// task is queued.
struct TipRev {
  bool operator==(const TipRev&) const = default;
};

using Revision = std::variant<RepoRev, SyncedCopy, TipRev>;

// What a log header records for a component: the hash, or "synced".
std::string revision_token(const Revision& rev);

class BuildKind {
 public:
  static BuildKind user() { return BuildKind(); }
  static BuildKind ci(std::string job_name);
  // "user" or a CI job name.
  static std::optional<BuildKind> parse(std::string_view text);

  bool is_user() const { return !ci_name_; }
  std::string str() const { return ci_name_ ? *ci_name_ : std::string(kUserKind); }

  auto operator<=>(const BuildKind&) const = default;

  static constexpr std::string_view kUserKind = "user";

 private:
  BuildKind() = default;
  std::optional<std::string> ci_name_;
};

struct HostSpec {
  enum class Mode { SingleMachine, Cluster };

  Mode mode = Mode::SingleMachine;
  // Shell-style glob over host names; single-machine mode only.
  std::optional<std::string> host_filter;

  static HostSpec single(std::optional<std::string> filter = std::nullopt) {
    return {Mode::SingleMachine, std::move(filter)};
  }
  static HostSpec cluster() { return {Mode::Cluster, std::nullopt}; }

  bool is_cluster() const { return mode == Mode::Cluster; }
  bool operator==(const HostSpec&) const = default;
};

enum class Priority { Low = 0, Normal = 1, High = 2 };

std::string_view to_string(Priority p);
std::optional<Priority> parse_priority(std::string_view text);

struct BuildConfig {
  BuildKind kind = BuildKind::user();
  std::map<ComponentName, Revision> components;
  std::vector<std::string> sessions;
  std::vector<std::string> exclude_sessions;
  std::vector<std::string> options;  // "key=value"
  HostSpec host_spec;
  Priority priority = Priority::Normal;
  std::chrono::seconds timeout{3600};

  bool operator==(const BuildConfig&) const = default;
};

// Throws Error(InvalidArgument) describing the first violated invariant.
// `allow_tip` admits TipRev entries (CI templates).
void validate(const BuildConfig& config, const ComponentName& base_component,
              bool allow_tip = false);

struct Task {
  Uuid uuid;
  BuildConfig config;
  Timestamp submitted_at{};
  std::optional<std::string> submitter;
  // Commit-history summary for CI builds; empty for user builds.
  std::string description;

  bool operator==(const Task&) const = default;
};

struct JobName {
  BuildKind kind = BuildKind::user();
  std::int64_t serial = 0;

  // "<kind>/<serial>"
  std::string str() const;
  static std::optional<JobName> parse(std::string_view text);

  auto operator<=>(const JobName&) const = default;
};

enum class JobStatus { Running, Interrupting, Finished };
enum class EscalationCause { None, Cancel, Timeout };

std::string_view to_string(JobStatus s);
std::string_view to_string(EscalationCause c);

struct Job {
  JobName name;
  Uuid task_uuid;
  BuildConfig config;
  std::vector<std::string> hosts;
  Timestamp started_at{};
  JobStatus status = JobStatus::Running;
  std::optional<Timestamp> interrupting_since;
  bool cancel_requested = false;
  EscalationCause cause = EscalationCause::None;
  // Relative to the log directory.
  std::string log_path;
  std::string description;
  std::optional<std::string> submitter;

  bool active() const { return status != JobStatus::Finished; }
  bool operator==(const Job&) const = default;
};

enum class ResultStatus { Ok, Failed, Cancelled, TimedOut, Aborted };

// Log trailer tokens: ok | failed | cancelled | timed_out | aborted
std::string_view to_string(ResultStatus s);
std::optional<ResultStatus> parse_result_status(std::string_view text);

struct Result {
  JobName name;
  ResultStatus status = ResultStatus::Ok;
  std::map<std::string, std::string> component_revisions;
  Timestamp started_at{};
  Timestamp finished_at{};
  std::string log_ref;

  bool operator==(const Result&) const = default;
};

struct Host {
  std::string name;
  bool cluster_member = false;
  int single_slots = 1;
  std::string address = "local";

  bool operator==(const Host&) const = default;
};

struct OnCommit {
  std::set<ComponentName> components;
  bool operator==(const OnCommit&) const = default;
};

struct Scheduled {
  // Minutes after 00:00 UTC.
  int minute_of_day = 0;
  // 0 = Sunday ... 6 = Saturday; empty means every day.
  std::set<unsigned> weekdays;
  bool operator==(const Scheduled&) const = default;
};

using CiTrigger = std::variant<OnCommit, Scheduled>;

struct CiJobSpec {
  std::string name;
  CiTrigger trigger;
  BuildConfig config_template;

  bool operator==(const CiJobSpec&) const = default;
};

// Hosts a config would occupy if started now, or nullopt when infeasible.
// Cluster builds take every cluster member; single-machine builds take the
// matching host with the most free slots (ties by configured order).
std::optional<std::vector<std::string>> select_hosts(const BuildConfig& config,
                                                     std::span<const Host> hosts,
                                                     std::span<const Job> running);

bool is_feasible(const BuildConfig& config, std::span<const Host> hosts,
                 std::span<const Job> running);

// Highest-priority feasible task; ties by earliest submission, then uuid.
std::optional<Task> select_next(std::span<const Task> queue, std::span<const Host> hosts,
                                std::span<const Job> running);

JobName assign_name(const BuildKind& kind, std::int64_t max_serial_so_far);

enum class TimeoutState { Fine, TimedOut };

TimeoutState timeout_status(const Job& job, TimePoint now);

// Single-machine jobs currently placed on each host.
std::map<std::string, int> slot_occupancy(std::span<const Job> running);

// Hosts held by an active cluster build.
std::set<std::string> cluster_hosts_in_use(std::span<const Job> running);

}  // namespace buildmgr
