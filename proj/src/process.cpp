#include "buildmgr/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "buildmgr/error.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

namespace {

struct Pipe {
  int read = -1;
  int write = -1;
  Pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(ErrorCode::SpawnFailed, std::strerror(errno));
    read = fds[0];
    write = fds[1];
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (read >= 0) ::close(read);
    read = -1;
  }
  void close_write() {
    if (write >= 0) ::close(write);
    write = -1;
  }
  int release_read() {
    int fd = read;
    read = -1;
    return fd;
  }
};

// Forks and execs argv with stdout/stderr on the given descriptors and stdin
// on /dev/null. Exec failures are reported back through a close-on-exec pipe.
pid_t spawn_child(const std::vector<std::string>& argv, const std::optional<fs::path>& cwd,
                  int out_fd, int err_fd, bool new_group) {
  if (argv.empty()) throw Error(ErrorCode::SpawnFailed, "empty command line");
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  const std::string dir = cwd ? cwd->string() : std::string();

  Pipe status;
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::SpawnFailed, std::strerror(errno));
  if (pid == 0) {
    if (new_group) ::setpgid(0, 0);
    sigset_t none;
    sigemptyset(&none);
    ::sigprocmask(SIG_SETMASK, &none, nullptr);
    ::signal(SIGPIPE, SIG_DFL);
    ::signal(SIGTERM, SIG_DFL);
    ::signal(SIGINT, SIG_DFL);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, 0);
    ::dup2(out_fd, 1);
    ::dup2(err_fd, 2);
    int err = 0;
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) {
      err = errno;
    } else {
      ::execvp(cargv[0], cargv.data());
      err = errno;
    }
    [[maybe_unused]] auto n = ::write(status.write, &err, sizeof err);
    ::_exit(127);
  }
  status.close_write();
  int err = 0;
  ssize_t n;
  do {
    n = ::read(status.read, &err, sizeof err);
  } while (n < 0 && errno == EINTR);
  if (n == static_cast<ssize_t>(sizeof err)) {
    ::waitpid(pid, nullptr, 0);
    throw Error(ErrorCode::SpawnFailed, argv[0] + ": " + std::strerror(err));
  }
  return pid;
}

ExitOutcome decode_status(int status) {
  if (WIFSIGNALED(status)) return {true, WTERMSIG(status)};
  return {false, WEXITSTATUS(status)};
}

}  // namespace

CommandOutput run_command(const std::vector<std::string>& argv,
                          const std::optional<fs::path>& cwd) {
  Pipe out, err;
  const pid_t pid = spawn_child(argv, cwd, out.write, err.write, false);
  out.close_write();
  err.close_write();

  CommandOutput result;
  pollfd fds[2] = {{out.read, POLLIN, 0}, {err.read, POLLIN, 0}};
  std::string* sinks[2] = {&result.out, &result.err};
  int open_fds = 2;
  char buf[8192];
  while (open_fds > 0) {
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  const auto outcome = decode_status(status);
  result.exit_code = outcome.signalled ? 128 + outcome.code : outcome.code;
  return result;
}

std::string shell_quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

bool is_vcs_metadata(const fs::path& name) {
  const auto n = name.filename().string();
  return n == ".hg" || n == ".git" || n == ".svn";
}

void copy_tree_without_vcs(const fs::path& src, const fs::path& dest) {
  if (!fs::is_directory(src)) throw Error(ErrorCode::Io, "not a directory: " + src.string());
  fs::remove_all(dest);
  fs::create_directories(dest);
  for (auto it = fs::recursive_directory_iterator(src); it != fs::recursive_directory_iterator();
       ++it) {
    const auto& entry = *it;
    if (is_vcs_metadata(entry.path())) {
      if (entry.is_directory()) it.disable_recursion_pending();
      continue;
    }
    const auto target = dest / fs::relative(entry.path(), src);
    if (entry.is_symlink()) {
      fs::copy_symlink(entry.path(), target);
    } else if (entry.is_directory()) {
      fs::create_directories(target);
    } else if (entry.is_regular_file()) {
      fs::copy_file(entry.path(), target, fs::copy_options::overwrite_existing);
    }
  }
}

Subprocess::Subprocess(const std::vector<std::string>& argv, const fs::path& cwd,
                       LineCallback on_line)
    : on_line_(std::move(on_line)) {
  Pipe out;
  pid_ = spawn_child(argv, cwd, out.write, out.write, true);
  // Also set from the parent so signal_group() cannot race the child's setpgid.
  ::setpgid(pid_, pid_);
  out.close_write();
  const int fd = out.release_read();
  pump_thread_ = std::thread([this, fd] { pump(fd); });
}

Subprocess::~Subprocess() {
  signal_group(SIGKILL);
  if (pump_thread_.joinable()) pump_thread_.join();
}

void Subprocess::pump(int fd) {
  std::string pending;
  auto emit_lines = [&] {
    std::size_t start = 0;
    for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
      on_line_(std::string_view(pending).substr(start, nl + 1 - start));
      start = nl + 1;
    }
    pending.erase(0, start);
  };

  bool eof = false;
  bool exited = false;
  char buf[8192];
  while (!eof) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready > 0) {
      const ssize_t n = ::read(fd, buf, sizeof buf);
      if (n > 0) {
        pending.append(buf, static_cast<std::size_t>(n));
        emit_lines();
        continue;
      }
      if (n == 0 || errno != EINTR) eof = true;
    } else if (ready == 0 && exited) {
      // Leader gone and nothing more arrived: stray descendants may still
      // hold the pipe, but the build's output is complete.
      break;
    }
    if (!exited) {
      siginfo_t info{};
      if (::waitid(P_PID, static_cast<id_t>(pid_), &info, WEXITED | WNOHANG | WNOWAIT) == 0 &&
          info.si_pid == pid_) {
        exited = true;
      }
    }
  }
  ::close(fd);
  if (!pending.empty()) {
    pending.push_back('\n');
    on_line_(pending);
  }

  // Wait without reaping, then reap under the lock so signal_group never
  // targets a recycled process group id.
  siginfo_t info{};
  while (::waitid(P_PID, static_cast<id_t>(pid_), &info, WEXITED | WNOWAIT) < 0 && errno == EINTR) {
  }
  std::lock_guard lock(mutex_);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  reaped_ = true;
  outcome_ = decode_status(status);
  done_cv_.notify_all();
}

void Subprocess::signal_group(int sig) {
  std::lock_guard lock(mutex_);
  if (!reaped_ && pid_ > 0) ::kill(-pid_, sig);
}

std::optional<ExitOutcome> Subprocess::try_wait() {
  std::lock_guard lock(mutex_);
  return outcome_;
}

ExitOutcome Subprocess::wait() {
  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [&] { return outcome_.has_value(); });
  return *outcome_;
}

std::optional<ExitOutcome> Subprocess::wait_for(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  done_cv_.wait_for(lock, timeout, [&] { return outcome_.has_value(); });
  return outcome_;
}

}  // namespace buildmgr
