#pragma once

// A runner wired to a temp store, a mock repository and local executors.

#include <memory>

#include "buildmgr/codec.hpp"
#include "buildmgr/log_format.hpp"
#include "buildmgr/runner.hpp"
#include "support.hpp"

namespace testing {

class CountingHook final : public buildmgr::NotificationHook {
 public:
  void notify(const buildmgr::Result& r) override { seen.push_back(r); }
  std::vector<buildmgr::Result> seen;
};

struct RunnerRig {
  TempDir dir;
  buildmgr::StoreConfig store_cfg = store_config(dir.path());
  buildmgr::Store store{store_cfg};
  buildmgr::MockVcs vcs;
  buildmgr::SimClock clock{buildmgr::TimePoint(std::chrono::seconds(kEpoch2025))};
  buildmgr::LocalExecutor local{dir / "env"};
  std::unique_ptr<buildmgr::SshExecutor> ssh;
  CountingHook hook;
  std::string base_rev;
  std::unique_ptr<buildmgr::Runner> runner;

  explicit RunnerRig(std::vector<buildmgr::Host> hosts = {{"h1", true, 2, "local"}},
                     std::string build_command = fixture("build.sh").string(),
                     std::chrono::milliseconds grace = std::chrono::seconds(2)) {
    vcs.add_component(buildmgr::ComponentName("base"));
    base_rev = vcs.commit(buildmgr::ComponentName("base"), {{"MARKER", "from-vcs"}});
    buildmgr::SshOptions o;
    o.ssh_command = {fixture("fake_ssh.sh").string()};
    o.rsync_command = {fixture("fake_rsync.sh").string()};
    o.remote_base = (dir / "remote").string();
    ssh = std::make_unique<buildmgr::SshExecutor>(o);
    buildmgr::RunnerConfig cfg;
    cfg.hosts = std::move(hosts);
    cfg.build_command = std::move(build_command);
    cfg.grace_period = grace;
    cfg.work_dir = dir / "prepare";
    runner = std::make_unique<buildmgr::Runner>(
        store, vcs,
        [this](const buildmgr::Host& h) -> buildmgr::Executor& {
          if (h.address == "local") return local;
          return *ssh;
        },
        cfg, clock, &hook);
  }

  buildmgr::Task enqueue(std::uint64_t n, buildmgr::BuildConfig config) {
    auto t = make_task(n, std::move(config), clock.now_seconds().time_since_epoch().count());
    store.enqueue_task(t);
    return t;
  }

  buildmgr::BuildConfig config(std::vector<std::string> sessions = {"HOL"}) {
    auto c = user_config(base_rev);
    c.sessions = std::move(sessions);
    return c;
  }

  // Cycles in real time until no job is active or the deadline passes.
  bool drain(std::chrono::milliseconds timeout = std::chrono::seconds(15)) {
    return wait_until([&] {
      runner->cycle();
      return store.active_jobs().empty() && store.queued_tasks().empty();
    }, timeout, std::chrono::milliseconds(20));
  }

  // Waits for `text` to appear in the running job's partial log.
  bool live_output(const buildmgr::JobName& name, const std::string& text) {
    const auto path = store_cfg.log_dir / buildmgr::partial_log_ref(name);
    return wait_until([&] {
      return fs::exists(path) && buildmgr::read_file(path).find(text) != std::string::npos;
    });
  }

  std::string final_log(const buildmgr::Result& r) {
    return buildmgr::gunzip(buildmgr::read_file(store_cfg.log_dir / r.log_ref));
  }
};

}  // namespace testing
