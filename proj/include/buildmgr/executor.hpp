#pragma once

// Build execution: self-contained source trees, per-job environments on a
// host, and supervised build processes with streamed output.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "buildmgr/core_model.hpp"
#include "buildmgr/process.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

class LogSink {
 public:
  virtual ~LogSink() = default;
  // Appends and flushes; `data` is one or more complete lines.
  virtual void append(std::string_view data) = 0;
};

class FileLogSink final : public LogSink {
 public:
  explicit FileLogSink(const std::filesystem::path& path);
  void append(std::string_view data) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class MemoryLogSink final : public LogSink {
 public:
  void append(std::string_view data) override {
    std::lock_guard lock(mutex_);
    text_ += data;
  }
  std::string text() const {
    std::lock_guard lock(mutex_);
    return text_;
  }

 private:
  mutable std::mutex mutex_;
  std::string text_;
};

inline constexpr std::string_view kEnvMarker = ".build_manager_env";
inline constexpr std::string_view kComponentList = ".build_manager_components";

struct PreparedTree {
  // Base component at the root, extras under components/<name>.
  std::filesystem::path root;
  std::string description;
};

// Throws UnknownRevision, MissingSyncedCopy, VcsUnavailable.
PreparedTree prepare_tree(VcsAdapter& adapter, const BuildConfig& config,
                          const ComponentName& base_component,
                          const std::filesystem::path& sync_dir,
                          const std::filesystem::path& dest, std::string description = {});

struct EnvRef {
  std::string host;
  std::string address;
  std::string root;  // per-job directory on that host
  std::string job_name;

  bool operator==(const EnvRef&) const = default;
};

class ProcessHandle {
 public:
  virtual ~ProcessHandle() = default;
  // Polite termination of the whole process group. Idempotent.
  virtual void interrupt() = 0;
  // Unconditional termination. Idempotent.
  virtual void kill() = 0;
  virtual std::optional<ExitOutcome> try_wait() = 0;
  virtual ExitOutcome wait() = 0;
  virtual std::optional<ExitOutcome> wait_for(std::chrono::milliseconds timeout) = 0;
};

class Executor {
 public:
  virtual ~Executor() = default;

  // Transfers the tree into a fresh per-job directory, registers components
  // and writes the environment marker. Repeating it for the same job returns
  // the same EnvRef. Throws HostUnreachable or TransferFailed.
  virtual EnvRef provision(const Host& host, const PreparedTree& tree, const JobName& job) = 0;

  // Starts argv in the environment root; merged output goes to `sink`.
  // Throws SpawnFailed.
  virtual std::unique_ptr<ProcessHandle> spawn(const EnvRef& env,
                                               const std::vector<std::string>& argv,
                                               std::shared_ptr<LogSink> sink) = 0;

  // Removes the per-job directory; errors are logged, never thrown.
  virtual void teardown(const EnvRef& env) = 0;
};

// Per-job directories below a local base directory.
class LocalExecutor final : public Executor {
 public:
  explicit LocalExecutor(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

  EnvRef provision(const Host& host, const PreparedTree& tree, const JobName& job) override;
  std::unique_ptr<ProcessHandle> spawn(const EnvRef& env, const std::vector<std::string>& argv,
                                       std::shared_ptr<LogSink> sink) override;
  void teardown(const EnvRef& env) override;

 private:
  std::filesystem::path base_dir_;
};

struct SshOptions {
  std::vector<std::string> ssh_command = {"ssh", "-o", "BatchMode=yes"};
  std::vector<std::string> rsync_command = {"rsync", "-a", "--delete"};
  // Per-job directories are created below this path on the remote host.
  std::string remote_base = "/tmp/build_manager";
};

// Remote hosts reached through the ssh and rsync command-line clients.
// Host::address is the ssh destination ("user@host"); which account it names
// decides the permissions the build runs with.
class SshExecutor final : public Executor {
 public:
  explicit SshExecutor(SshOptions options) : options_(std::move(options)) {}

  EnvRef provision(const Host& host, const PreparedTree& tree, const JobName& job) override;
  std::unique_ptr<ProcessHandle> spawn(const EnvRef& env, const std::vector<std::string>& argv,
                                       std::shared_ptr<LogSink> sink) override;
  void teardown(const EnvRef& env) override;

  const SshOptions& options() const { return options_; }

 private:
  CommandOutput ssh(const std::string& address, const std::string& remote_command) const;

  SshOptions options_;
};

std::string env_dir_name(const JobName& job);

}  // namespace buildmgr
