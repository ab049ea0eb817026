#pragma once

// Entry points behind the `buildmgr` executable. Each returns the process
// exit code: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "buildmgr/config.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Advisory lock on "<database>.lock" held by a running service.
class StoreLock {
 public:
  // Throws LockHeld if another process holds it. In-memory stores need no
  // lock and always succeed.
  explicit StoreLock(const StoreConfig& store);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

struct SubmitOptions {
  std::vector<std::string> sessions;
  std::vector<std::string> exclude_sessions;
  std::vector<std::string> options;     // NAME=VALUE
  std::vector<std::string> components;  // NAME or NAME=REV
  bool cluster = false;
  std::string priority = "normal";
  std::optional<std::int64_t> timeout_seconds;
  std::optional<std::string> server;
  std::optional<std::string> submitter;
};

// Builds the task configuration. `--component NAME` without a revision syncs
// the sibling directory <workspace>/../NAME; the base component syncs the
// workspace itself unless given a revision; every other declared component is
// pinned to its current tip. Returns the config plus the directories to sync,
// keyed by component. Throws InvalidArgument, VcsUnavailable.
struct SubmitPlan {
  BuildConfig config;
  std::map<std::string, std::filesystem::path> sync_sources;
};
SubmitPlan plan_submission(const ServiceConfig& service, const SubmitOptions& options,
                           const std::filesystem::path& workspace, const Uuid& uuid,
                           VcsAdapter& adapter);

// Copies each source into sync_dir/<id>, without VCS metadata. On failure
// removes what was copied and throws SyncFailed.
void sync_workspace(const SubmitPlan& plan, const std::filesystem::path& sync_dir);

int cmd_submit(const ServiceConfig& service, const SubmitOptions& options,
               const std::filesystem::path& workspace, VcsAdapter& adapter, std::ostream& out,
               std::ostream& err);

int cmd_rebuild_db(const ServiceConfig& service, std::ostream& out, std::ostream& err);

// Runs until SIGINT or SIGTERM.
int cmd_serve(const ServiceConfig& service, std::ostream& err);

}  // namespace buildmgr
