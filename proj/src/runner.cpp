#include "buildmgr/runner.hpp"

#include <algorithm>
#include <iostream>

#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"
#include "buildmgr/log_format.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

std::vector<std::string> build_command_line(const std::string& build_command,
                                            const BuildConfig& config) {
  std::vector<std::string> argv = {build_command};
  for (const auto& opt : config.options) {
    argv.push_back("-o");
    argv.push_back(opt);
  }
  for (const auto& excluded : config.exclude_sessions) {
    argv.push_back("-x");
    argv.push_back(excluded);
  }
  argv.insert(argv.end(), config.sessions.begin(), config.sessions.end());
  return argv;
}

ResultStatus result_status(EscalationCause cause, const std::optional<ExitOutcome>& exit,
                           bool pipeline_error) {
  if (pipeline_error) return ResultStatus::Aborted;
  if (cause == EscalationCause::Cancel) return ResultStatus::Cancelled;
  if (cause == EscalationCause::Timeout) return ResultStatus::TimedOut;
  if (!exit) return ResultStatus::Aborted;
  return !exit->signalled && exit->code == 0 ? ResultStatus::Ok : ResultStatus::Failed;
}

Runner::Runner(Store& store, VcsAdapter& adapter, ExecutorResolver executors, RunnerConfig config,
               const Clock& clock, NotificationHook* hook)
    : store_(store),
      adapter_(adapter),
      executors_(std::move(executors)),
      config_(std::move(config)),
      clock_(clock),
      hook_(hook) {}

Runner::~Runner() { shutdown(); }

void Runner::shutdown() {
  for (auto& [name, live] : live_) {
    if (live.handle && !live.handle->try_wait()) {
      live.handle->kill();
      live.handle->wait_for(std::chrono::seconds(5));
    }
  }
  live_.clear();
}

const Host& Runner::host(const std::string& name) const {
  auto it = std::find_if(config_.hosts.begin(), config_.hosts.end(),
                         [&](const Host& h) { return h.name == name; });
  if (it == config_.hosts.end()) throw Error(ErrorCode::InvalidArgument, "unknown host " + name);
  return *it;
}

fs::path Runner::log_path(const std::string& ref) const { return store_.config().log_dir / ref; }

void Runner::report_failure(const Job& job, const std::exception& e) {
  std::cerr << "runner: " << job.name.str() << ": " << e.what() << "\n";
}

CycleReport Runner::cycle() {
  CycleReport report;

  // 1. finalize exited processes
  for (auto it = live_.begin(); it != live_.end();) {
    auto exit = it->second.handle->try_wait();
    if (!exit) {
      ++it;
      continue;
    }
    const JobName name = it->first;
    try {
      auto job = store_.find_job(name);
      if (job && job->active()) {
        finalize_job(*job, exit);
        ++report.finalized;
      }
    } catch (const std::exception& e) {
      std::cerr << "runner: finalizing " << name.str() << ": " << e.what() << "\n";
      stuck_.insert(name);
    }
    it = live_.erase(it);
  }

  const auto now = clock_.now();
  const auto running = store_.active_jobs();

  for (const auto& job : running) {
    if (live_.contains(job.name) || stuck_.contains(job.name)) continue;
    // Active in the store but not supervised here: left behind by a previous
    // service instance.
    try {
      finalize_job(job, std::nullopt, "build process lost (service restarted)");
      ++report.finalized;
    } catch (const std::exception& e) {
      report_failure(job, e);
      stuck_.insert(job.name);
    }
  }

  // 2. escalate cancelled and timed-out jobs
  for (const auto& job : running) {
    auto it = live_.find(job.name);
    if (it == live_.end() || job.status != JobStatus::Running) continue;
    EscalationCause cause = EscalationCause::None;
    if (job.cancel_requested) {
      cause = EscalationCause::Cancel;
    } else if (timeout_status(job, now) == TimeoutState::TimedOut) {
      cause = EscalationCause::Timeout;
    }
    if (cause == EscalationCause::None) continue;
    try {
      store_.mark_interrupting(job.name, to_timestamp(now), cause);
      it->second.interrupted_at = now;
      it->second.handle->interrupt();
      ++report.interrupted;
    } catch (const std::exception& e) {
      report_failure(job, e);
    }
  }

  // 3. force termination after the grace period
  for (auto& [name, live] : live_) {
    if (!live.interrupted_at || live.killed) continue;
    if (now - *live.interrupted_at >= config_.grace_period) {
      live.handle->kill();
      live.killed = true;
      ++report.killed;
    }
  }

  // 4. start feasible tasks
  for (int attempts = 0; attempts < 1000; ++attempts) {
    const auto state = store_.snapshot();
    const auto next = select_next(state.queue, config_.hosts, state.running);
    if (!next) break;
    const auto hosts = select_hosts(next->config, config_.hosts, state.running);
    const auto name = assign_name(next->config.kind, store_.max_serial(next->config.kind));
    Job job;
    try {
      job = store_.claim_task(next->uuid, name, *hosts, clock_.now_seconds(),
                              partial_log_ref(name));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StaleSerial || e.code() == ErrorCode::AlreadyClaimed) continue;
      throw;
    }
    start_pipeline(job);
    ++report.started;
  }
  return report;
}

void Runner::start_pipeline(const Job& job) {
  const auto partial = log_path(job.log_path);
  std::error_code ec;
  fs::remove(partial, ec);
  std::shared_ptr<FileLogSink> sink;
  Live live;
  std::string step = "log";
  try {
    sink = std::make_shared<FileLogSink>(partial);
    sink->append(log_header(job.name, job.config, job.started_at));

    step = "prepare";
    const auto tree_dir = config_.work_dir / env_dir_name(job.name) / "tree";
    auto tree = prepare_tree(adapter_, job.config, config_.base_component,
                             store_.config().sync_dir, tree_dir, job.description);

    step = "provision";
    const Host& target = host(job.hosts.front());
    live.executor = &executors_(target);
    live.env = live.executor->provision(target, tree, job.name);
    fs::remove_all(tree_dir.parent_path(), ec);

    step = "spawn";
    live.handle = live.executor->spawn(*live.env, build_command_line(config_.build_command, job.config),
                                       sink);
  } catch (const std::exception& e) {
    if (live.executor && live.env) live.executor->teardown(*live.env);
    fs::remove_all(config_.work_dir / env_dir_name(job.name), ec);
    try {
      finalize_job(job, std::nullopt, step + " failed: " + e.what());
    } catch (const std::exception& f) {
      report_failure(job, f);
      stuck_.insert(job.name);
    }
    return;
  }
  live_.emplace(job.name, std::move(live));
}

Result Runner::finalize_job(const Job& job, const std::optional<ExitOutcome>& exit,
                            const std::string& pipeline_error) {
  const auto partial = log_path(job.log_path);
  std::string log;
  if (fs::is_regular_file(partial)) {
    log = read_file(partial);
  } else {
    log = log_header(job.name, job.config, job.started_at);
  }
  if (!pipeline_error.empty()) {
    if (!log.empty() && log.back() != '\n') log += "\n";
    log += "build manager: " + pipeline_error + "\n";
  }

  Result result;
  result.name = job.name;
  result.status = result_status(job.cause, exit, !pipeline_error.empty());
  for (const auto& [component, rev] : job.config.components) {
    result.component_revisions[component.str()] = revision_token(rev);
  }
  result.started_at = job.started_at;
  result.finished_at = std::max(clock_.now_seconds(), job.started_at);
  result.log_ref = final_log_ref(job.name);

  log += log_trailer(log, result.status, result.finished_at);
  write_file_atomic(log_path(result.log_ref), gzip(log));

  if (auto it = live_.find(job.name); it != live_.end() && it->second.env) {
    it->second.executor->teardown(*it->second.env);
  }
  store_.finalize(job.name, result);
  std::error_code ec;
  fs::remove(partial, ec);

  if (hook_ && (result.status == ResultStatus::Failed || result.status == ResultStatus::Aborted)) {
    try {
      hook_->notify(result);
    } catch (const std::exception& e) {
      report_failure(job, e);
    }
  }
  return result;
}

}  // namespace buildmgr
