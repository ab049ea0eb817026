#include <signal.h>

#include <algorithm>
#include <iostream>

#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"
#include "buildmgr/executor.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

FileLogSink::FileLogSink(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::Io, "cannot open log " + path.string());
}

void FileLogSink::append(std::string_view data) {
  std::lock_guard lock(mutex_);
  out_.write(data.data(), static_cast<std::streamsize>(data.size()));
  out_.flush();
}

namespace {

class LocalProcess final : public ProcessHandle {
 public:
  LocalProcess(const std::vector<std::string>& argv, const fs::path& cwd,
               std::shared_ptr<LogSink> sink)
      : process_(argv, cwd, [sink](std::string_view line) { sink->append(line); }) {}

  void interrupt() override { process_.signal_group(SIGTERM); }
  void kill() override { process_.signal_group(SIGKILL); }
  std::optional<ExitOutcome> try_wait() override { return process_.try_wait(); }
  ExitOutcome wait() override { return process_.wait(); }
  std::optional<ExitOutcome> wait_for(std::chrono::milliseconds timeout) override {
    return process_.wait_for(timeout);
  }

 private:
  Subprocess process_;
};

std::string component_list(const fs::path& tree) {
  std::string out;
  const auto dir = tree / "components";
  if (!fs::is_directory(dir)) return out;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& n : names) out += "components/" + n + "\n";
  return out;
}

}  // namespace

EnvRef LocalExecutor::provision(const Host& host, const PreparedTree& tree, const JobName& job) {
  const auto root = base_dir_ / env_dir_name(job);
  EnvRef env{host.name, host.address, root.string(), job.str()};
  std::error_code ec;
  fs::create_directories(base_dir_, ec);
  if (!fs::is_directory(base_dir_)) {
    throw Error(ErrorCode::HostUnreachable, "cannot use " + base_dir_.string());
  }
  const auto marker = root / kEnvMarker;
  if (fs::is_regular_file(marker) && read_file(marker) == job.str() + "\n") return env;
  try {
    copy_tree_without_vcs(tree.root, root);
    write_file_atomic(root / kComponentList, component_list(tree.root));
    write_file_atomic(marker, job.str() + "\n");
  } catch (const std::exception& e) {
    throw Error(ErrorCode::TransferFailed, e.what());
  }
  return env;
}

std::unique_ptr<ProcessHandle> LocalExecutor::spawn(const EnvRef& env,
                                                    const std::vector<std::string>& argv,
                                                    std::shared_ptr<LogSink> sink) {
  return std::make_unique<LocalProcess>(argv, env.root, std::move(sink));
}

void LocalExecutor::teardown(const EnvRef& env) {
  std::error_code ec;
  fs::remove_all(env.root, ec);
  if (ec) std::cerr << "teardown of " << env.root << " failed: " << ec.message() << "\n";
}

}  // namespace buildmgr
