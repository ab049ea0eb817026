#include <signal.h>

#include <algorithm>
#include <iostream>

#include "buildmgr/error.hpp"
#include "buildmgr/executor.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

namespace {

// OpenSSH reports its own connection failures with 255.
constexpr int kSshConnectionFailure = 255;
constexpr const char* kPidFile = ".build_manager_pid";

std::string join_quoted(const std::vector<std::string>& argv) {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out += ' ';
    out += shell_quote(a);
  }
  return out;
}

// The build runs remotely as the session leader started by sshd; signals go to
// its process group through the pid it recorded on start.
class RemoteProcess final : public ProcessHandle {
 public:
  RemoteProcess(const SshExecutor& executor, const std::string& address, std::string root,
                const std::vector<std::string>& local_argv, std::shared_ptr<LogSink> sink)
      : executor_(executor),
        address_(address),
        root_(std::move(root)),
        process_(local_argv, fs::current_path(),
                 [sink](std::string_view line) { sink->append(line); }) {}

  void interrupt() override { remote_signal("TERM"); }

  void kill() override {
    remote_signal("KILL");
    process_.signal_group(SIGKILL);
  }

  std::optional<ExitOutcome> try_wait() override { return process_.try_wait(); }
  ExitOutcome wait() override { return process_.wait(); }
  std::optional<ExitOutcome> wait_for(std::chrono::milliseconds timeout) override {
    return process_.wait_for(timeout);
  }

 private:
  void remote_signal(const std::string& sig) {
    if (process_.try_wait()) return;
    const std::string pid_file = shell_quote(root_ + "/" + kPidFile);
    const std::string cmd = "test -f " + pid_file + " && pid=$(cat " + pid_file +
                            ") && { kill -" + sig + " -- -\"$pid\" 2>/dev/null || kill -" + sig +
                            " \"$pid\" 2>/dev/null; }; true";
    std::vector<std::string> argv = executor_.options().ssh_command;
    argv.push_back(address_);
    argv.push_back(cmd);
    try {
      run_command(argv);
    } catch (const Error& e) {
      std::cerr << "remote signal to " << address_ << " failed: " << e.what() << "\n";
    }
  }

  const SshExecutor& executor_;
  std::string address_;
  std::string root_;
  Subprocess process_;
};

}  // namespace

CommandOutput SshExecutor::ssh(const std::string& address, const std::string& remote_command) const {
  std::vector<std::string> argv = options_.ssh_command;
  argv.push_back(address);
  argv.push_back(remote_command);
  try {
    return run_command(argv);
  } catch (const Error& e) {
    throw Error(ErrorCode::HostUnreachable, e.what());
  }
}

EnvRef SshExecutor::provision(const Host& host, const PreparedTree& tree, const JobName& job) {
  const std::string root = options_.remote_base + "/" + env_dir_name(job);
  EnvRef env{host.name, host.address, root, job.str()};

  std::string components;
  if (fs::is_directory(tree.root / "components")) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(tree.root / "components")) {
      if (entry.is_directory()) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) components += "components/" + n + "\n";
  }

  auto attempt = [&]() {
    auto check = ssh(host.address, "cat " + shell_quote(root + "/" + std::string(kEnvMarker)) +
                                       " 2>/dev/null; true");
    if (check.exit_code == kSshConnectionFailure) {
      throw Error(ErrorCode::HostUnreachable, host.address + ": " + check.err);
    }
    if (check.out == job.str() + "\n") return;

    auto mk = ssh(host.address, "rm -rf " + shell_quote(root) + " && mkdir -p " + shell_quote(root));
    if (mk.exit_code == kSshConnectionFailure) {
      throw Error(ErrorCode::HostUnreachable, host.address + ": " + mk.err);
    }
    if (mk.exit_code != 0) throw Error(ErrorCode::TransferFailed, mk.err);

    std::vector<std::string> rsync = options_.rsync_command;
    rsync.push_back(tree.root.string() + "/");
    rsync.push_back(host.address + ":" + root + "/");
    CommandOutput copy;
    try {
      copy = run_command(rsync);
    } catch (const Error& e) {
      throw Error(ErrorCode::TransferFailed, e.what());
    }
    if (copy.exit_code != 0) throw Error(ErrorCode::TransferFailed, copy.err);

    auto reg = ssh(host.address, "cd " + shell_quote(root) + " && printf %s " +
                                     shell_quote(components) + " > " +
                                     std::string(kComponentList) + " && printf '%s\\n' " +
                                     shell_quote(job.str()) + " > " + std::string(kEnvMarker));
    if (reg.exit_code != 0) throw Error(ErrorCode::TransferFailed, reg.err);
  };

  try {
    attempt();
  } catch (const Error& first) {
    std::cerr << "provision on " << host.name << " failed, retrying: " << first.what() << "\n";
    attempt();
  }
  return env;
}

std::unique_ptr<ProcessHandle> SshExecutor::spawn(const EnvRef& env,
                                                  const std::vector<std::string>& argv,
                                                  std::shared_ptr<LogSink> sink) {
  if (argv.empty()) throw Error(ErrorCode::SpawnFailed, "empty command line");
  const std::string remote = "cd " + shell_quote(env.root) + " && echo $$ > " + kPidFile +
                             " && exec " + join_quoted(argv) + " 2>&1";
  std::vector<std::string> local = options_.ssh_command;
  const auto& address = env.address;
  local.push_back(address);
  local.push_back(remote);
  return std::make_unique<RemoteProcess>(*this, address, env.root, local, std::move(sink));
}

void SshExecutor::teardown(const EnvRef& env) {
  try {
    auto out = ssh(env.address, "rm -rf " + shell_quote(env.root));
    if (out.exit_code != 0) std::cerr << "teardown of " << env.root << " failed: " << out.err;
  } catch (const Error& e) {
    std::cerr << "teardown of " << env.root << " failed: " << e.what() << "\n";
  }
}

}  // namespace buildmgr
