#include "buildmgr/service.hpp"

#include <iostream>

namespace buildmgr {

namespace {

std::vector<ComponentName> component_names(const ServiceConfig& config) {
  std::vector<ComponentName> out;
  for (const auto& c : config.components) out.push_back(c.name);
  return out;
}

SshOptions ssh_options(const ServiceConfig& config) {
  SshOptions o;
  o.ssh_command = config.ssh_command;
  o.rsync_command = config.rsync_command;
  o.remote_base = config.remote_base;
  return o;
}

}  // namespace

Service::Service(ServiceConfig config, VcsAdapter& adapter, const Clock& clock)
    : config_(std::move(config)),
      adapter_(adapter),
      clock_(clock),
      store_(std::make_unique<Store>(config_.store)),
      local_(config_.work_dir / "env"),
      ssh_(ssh_options(config_)) {
  if (!config_.notify_command.empty()) {
    hook_ = std::make_unique<CommandNotificationHook>(config_.notify_command);
  } else if (!config_.notify_file.empty()) {
    hook_ = std::make_unique<FileNotificationHook>(config_.notify_file);
  }
  RunnerConfig rc;
  rc.hosts = config_.hosts;
  rc.base_component = config_.base_component;
  rc.build_command = config_.build_command;
  rc.grace_period = config_.grace_period;
  rc.work_dir = config_.work_dir / "prepare";
  runner_ = std::make_unique<Runner>(
      *store_, adapter_, [this](const Host& h) -> Executor& { return executor_for(h); }, rc, clock_,
      hook_.get());
  poller_ = std::make_unique<Poller>(*store_, adapter_, component_names(config_), config_.ci_jobs,
                                     clock_);
  timer_ = std::make_unique<ScheduleTimer>(*store_, adapter_, config_.ci_jobs, clock_);
  cache_ = std::make_unique<LogCache>(config_.store.log_dir, clock_, config_.cache_ttl);
  WebConfig wc;
  wc.hosts = config_.hosts;
  wc.log_display_limit = config_.web.log_display_limit;
  wc.assets_dir = config_.web.assets_dir;
  web_ = std::make_unique<WebApp>(*store_, *cache_, wc);
  http_ = std::make_unique<HttpServer>(*web_);
  port_ = http_->bind(config_.web.address, config_.web.port);
}

Service::~Service() { stop(); }

Executor& Service::executor_for(const Host& host) {
  if (host.address == "local") return local_;
  return ssh_;
}

void Service::loop(const char* name, std::chrono::milliseconds period,
                   const std::function<void()>& body) {
  std::unique_lock lock(mutex_);
  while (!stopping_) {
    lock.unlock();
    try {
      body();
    } catch (const std::exception& e) {
      std::cerr << name << ": " << e.what() << "\n";
    }
    lock.lock();
    wake_.wait_for(lock, period, [&] { return stopping_; });
  }
}

void Service::start() {
  threads_.emplace_back([this] { http_->run(); });
  http_->wait_until_ready();
  threads_.emplace_back([this] { loop("runner", config_.runner_interval, [this] { runner_->cycle(); }); });
  threads_.emplace_back([this] { loop("poller", config_.poll_interval, [this] { poller_->cycle(); }); });
  // Slot boundaries are checked at the runner's pace; firing is idempotent.
  threads_.emplace_back([this] { loop("timer", config_.runner_interval, [this] { timer_->cycle(); }); });
  threads_.emplace_back([this] {
    loop("cache", config_.cache_ttl, [this] { cache_->evict_expired(); });
  });
}

void Service::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (http_) http_->stop();
  for (auto& t : threads_) t.join();
  threads_.clear();
  if (runner_) runner_->shutdown();
}

}  // namespace buildmgr
