#include "buildmgr/commands.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <iostream>

#include "buildmgr/error.hpp"
#include "buildmgr/process.hpp"
#include "buildmgr/service.hpp"
#include "buildmgr/store.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

StoreLock::StoreLock(const StoreConfig& store) {
  if (store.connection == ":memory:") return;
  const auto path = store.connection + ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::Io, path + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    if (err == EWOULDBLOCK) throw Error(ErrorCode::LockHeld, "store is in use by a running service");
    throw Error(ErrorCode::Io, path + ": " + std::strerror(err));
  }
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) ::close(fd_);
}

SubmitPlan plan_submission(const ServiceConfig& service, const SubmitOptions& options,
                           const fs::path& workspace, const Uuid& uuid, VcsAdapter& adapter) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  SubmitPlan plan;
  BuildConfig& c = plan.config;
  c.kind = BuildKind::user();
  c.sessions = options.sessions;
  c.exclude_sessions = options.exclude_sessions;
  c.options = options.options;
  c.host_spec = options.cluster ? HostSpec::cluster() : HostSpec::single();
  auto priority = parse_priority(options.priority);
  if (!priority) bad("priority must be low, normal or high");
  c.priority = *priority;
  if (options.timeout_seconds) {
    if (*options.timeout_seconds <= 0) bad("timeout must be positive");
    c.timeout = std::chrono::seconds(*options.timeout_seconds);
  }

  std::set<ComponentName> declared;
  for (const auto& comp : service.components) declared.insert(comp.name);

  auto sync = [&](const ComponentName& name, const fs::path& source) {
    const std::string id = uuid.str() + "_" + name.str();
    c.components.insert_or_assign(name, SyncedCopy{id});
    plan.sync_sources[id] = source;
  };

  std::set<ComponentName> given;
  for (const auto& spec : options.components) {
    const auto eq = spec.find('=');
    const std::string name_text = spec.substr(0, eq);
    if (!is_identifier(name_text)) bad("bad component '" + name_text + "'");
    const ComponentName name(name_text);
    if (!declared.contains(name)) bad("unknown component '" + name_text + "'");
    if (!given.insert(name).second) bad("component '" + name_text + "' given twice");
    if (eq == std::string::npos) {
      sync(name, name == service.base_component ? workspace : workspace.parent_path() / name_text);
    } else {
      const std::string rev = spec.substr(eq + 1);
      if (!is_revision_hash(rev)) bad("bad revision '" + rev + "' for " + name_text);
      c.components.insert_or_assign(name, RepoRev{rev});
    }
  }
  if (!given.contains(service.base_component)) sync(service.base_component, workspace);
  for (const auto& name : declared) {
    if (!c.components.contains(name)) c.components.emplace(name, RepoRev{adapter.tip(name)});
  }
  validate(c, service.base_component);
  return plan;
}

void sync_workspace(const SubmitPlan& plan, const fs::path& sync_dir) {
  std::vector<fs::path> done;
  try {
    for (const auto& [id, source] : plan.sync_sources) {
      std::error_code ec;
      if (!fs::is_directory(source, ec)) {
        throw Error(ErrorCode::SyncFailed, "not a readable directory: " + source.string());
      }
      const auto dest = sync_dir / id;
      done.push_back(dest);
      copy_tree_without_vcs(source, dest);
    }
  } catch (const std::exception& e) {
    for (const auto& d : done) {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
    if (const auto* err = dynamic_cast<const Error*>(&e); err && err->code() == ErrorCode::SyncFailed) {
      throw;
    }
    throw Error(ErrorCode::SyncFailed, e.what());
  }
}

int cmd_submit(const ServiceConfig& service, const SubmitOptions& options, const fs::path& workspace,
               VcsAdapter& adapter, std::ostream& out, std::ostream& err) {
  const Uuid uuid = Uuid::generate();
  SubmitPlan plan;
  try {
    plan = plan_submission(service, options, workspace, uuid, adapter);
  } catch (const Error& e) {
    err << "submit: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitRuntime;
  }

  std::unique_ptr<Store> store;
  try {
    store = std::make_unique<Store>(service.store);
  } catch (const Error& e) {
    err << "submit: " << Error(ErrorCode::StoreUnreachable, e.what()).what() << "\n";
    return kExitRuntime;
  }

  try {
    sync_workspace(plan, service.store.sync_dir);
  } catch (const Error& e) {
    err << "submit: " << e.what() << "\n";
    return kExitRuntime;
  }

  Task task;
  task.uuid = uuid;
  task.config = plan.config;
  task.submitted_at = to_timestamp(std::chrono::system_clock::now());
  task.submitter = options.submitter;
  try {
    store->enqueue_task(task);
  } catch (const Error& e) {
    for (const auto& [id, source] : plan.sync_sources) {
      std::error_code ec;
      fs::remove_all(service.store.sync_dir / id, ec);
    }
    err << "submit: " << e.what() << "\n";
    return kExitRuntime;
  }

  std::string base = options.server ? *options.server : service.base_url();
  while (base.ends_with('/')) base.pop_back();
  out << base << "/private/" << uuid.str() << "\n";
  return kExitOk;
}

int cmd_rebuild_db(const ServiceConfig& service, std::ostream& out, std::ostream& err) {
  try {
    StoreLock lock(service.store);
    // Checked before the discard: a missing log directory must not cost the
    // existing database.
    if (!fs::is_directory(service.store.log_dir)) {
      throw Error(ErrorCode::LogDirMissing, service.store.log_dir.string());
    }
    Store store(service.store, OpenMode::Discard);
    const auto report = store.rebuild_from_logs(service.store.log_dir);
    out << "results_recovered: " << report.results_recovered << "\n";
    out << "files_skipped: " << report.files_skipped << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "rebuild-db: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_serve(const ServiceConfig& service, std::ostream& err) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Block before any thread exists so that only sigwait below sees them.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    StoreLock lock(service.store);
    std::map<ComponentName, std::string> repositories;
    for (const auto& c : service.components) repositories.emplace(c.name, c.repository);
    HgAdapter adapter(repositories, {}, service.hg_command);
    SystemClock clock;
    Service svc(service, adapter, clock);
    svc.start();
    err << "serving on http://" << service.web.address << ":" << svc.port() << "\n";

    int sig = 0;
    sigwait(&signals, &sig);
    err << "shutting down\n";
    svc.stop();
    return kExitOk;
  } catch (const Error& e) {
    err << "serve: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? kExitUsage : kExitRuntime;
  }
}

}  // namespace buildmgr
