#pragma once

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace buildmgr {

struct CommandOutput {
  int exit_code = 0;  // 128 + signal when killed by a signal
  std::string out;
  std::string err;
};

// Runs argv to completion (no shell), capturing both streams. Throws
// Error(SpawnFailed) when the program cannot be executed.
CommandOutput run_command(const std::vector<std::string>& argv,
                          const std::optional<std::filesystem::path>& cwd = std::nullopt);

// Single-quotes `arg` for a POSIX shell.
std::string shell_quote(const std::string& arg);

// Recursive copy that skips VCS metadata directories (.hg, .git, .svn).
// Replaces `dest` if it exists.
void copy_tree_without_vcs(const std::filesystem::path& src, const std::filesystem::path& dest);

bool is_vcs_metadata(const std::filesystem::path& name);

struct ExitOutcome {
  bool signalled = false;
  int code = 0;  // exit status, or the signal number when signalled

  bool operator==(const ExitOutcome&) const = default;
};

// A child process in its own process group whose merged stdout/stderr is
// pumped line by line into `on_line` (each line newline-terminated) by a
// dedicated thread. The exit outcome becomes visible only after the output
// has been drained, so a waiter always sees the complete log.
class Subprocess {
 public:
  using LineCallback = std::function<void(std::string_view line)>;

  // Throws Error(SpawnFailed) if exec fails.
  Subprocess(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
             LineCallback on_line);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  pid_t pid() const { return pid_; }

  // Sends `sig` to the whole process group; no-op once the child is reaped.
  void signal_group(int sig);

  std::optional<ExitOutcome> try_wait();
  ExitOutcome wait();
  std::optional<ExitOutcome> wait_for(std::chrono::milliseconds timeout);

 private:
  void pump(int fd);

  pid_t pid_ = -1;
  LineCallback on_line_;
  std::mutex mutex_;
  std::condition_variable done_cv_;
  bool reaped_ = false;
  std::optional<ExitOutcome> outcome_;
  std::thread pump_thread_;
};

}  // namespace buildmgr
