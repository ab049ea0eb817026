#pragma once

// Job lifecycle: selection, the prepare/provision/spawn pipeline, timeout and
// cancel escalation, and finalization into a log-derived Result.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "buildmgr/core_model.hpp"
#include "buildmgr/executor.hpp"
#include "buildmgr/notify.hpp"
#include "buildmgr/store.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

struct RunnerConfig {
  std::vector<Host> hosts;
  ComponentName base_component{"base"};
  std::string build_command = "build";
  std::chrono::milliseconds grace_period{std::chrono::seconds(30)};
  // Scratch space for prepared trees.
  std::filesystem::path work_dir;
};

struct CycleReport {
  std::size_t started = 0;
  std::size_t interrupted = 0;
  std::size_t killed = 0;
  std::size_t finalized = 0;
};

// `build -o k=v ... -x excluded ... sessions...`
std::vector<std::string> build_command_line(const std::string& build_command,
                                            const BuildConfig& config);

// exit 0 -> Ok, otherwise Failed; an escalation cause overrides the exit code
// and a pipeline error overrides everything.
ResultStatus result_status(EscalationCause cause, const std::optional<ExitOutcome>& exit,
                           bool pipeline_error);

using ExecutorResolver = std::function<Executor&(const Host&)>;

class Runner {
 public:
  Runner(Store& store, VcsAdapter& adapter, ExecutorResolver executors, RunnerConfig config,
         const Clock& clock, NotificationHook* hook = nullptr);
  ~Runner();
  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  // One supervision pass, in order: finalize exited jobs; interrupt jobs
  // that were cancelled or timed out; kill interrupted jobs past the grace
  // period; start feasible tasks. Per-job failures never abort the cycle.
  CycleReport cycle();

  // Runs the pipeline for a freshly claimed job. On a pipeline error the job
  // is finalized immediately as Aborted.
  void start_pipeline(const Job& job);

  // Writes the trailer, compresses the log, tears the environment down and
  // persists the Result. Throws MissingLog (job stays unfinalized).
  Result finalize_job(const Job& job, const std::optional<ExitOutcome>& exit,
                      const std::string& pipeline_error = {});

  // Kills every live build process (service shutdown).
  void shutdown();

  std::size_t live_jobs() const { return live_.size(); }

 private:
  struct Live {
    Executor* executor = nullptr;
    std::optional<EnvRef> env;
    std::unique_ptr<ProcessHandle> handle;
    std::optional<TimePoint> interrupted_at;
    bool killed = false;
  };

  const Host& host(const std::string& name) const;
  std::filesystem::path log_path(const std::string& ref) const;
  void report_failure(const Job& job, const std::exception& e);

  Store& store_;
  VcsAdapter& adapter_;
  ExecutorResolver executors_;
  RunnerConfig config_;
  const Clock& clock_;
  NotificationHook* hook_;
  std::map<JobName, Live> live_;
  // Jobs whose finalization failed; left for the operator.
  std::set<JobName> stuck_;
};

}  // namespace buildmgr
