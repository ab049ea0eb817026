#pragma once

// The long-running service: poller, timer, runner and web server loops
// sharing one store.

#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "buildmgr/config.hpp"
#include "buildmgr/executor.hpp"
#include "buildmgr/http_server.hpp"
#include "buildmgr/log_cache.hpp"
#include "buildmgr/notify.hpp"
#include "buildmgr/poller.hpp"
#include "buildmgr/runner.hpp"
#include "buildmgr/store.hpp"
#include "buildmgr/timer.hpp"
#include "buildmgr/vcs.hpp"
#include "buildmgr/web_app.hpp"

namespace buildmgr {

class Service {
 public:
  // Opens the store and binds the web port. Throws on either failure.
  Service(ServiceConfig config, VcsAdapter& adapter, const Clock& clock);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void start();
  // Stops the loops, then kills remaining build processes. Their jobs stay
  // active in the store and are finalized as aborted by the next service.
  void stop();

  int port() const { return port_; }
  Store& store() { return *store_; }
  Runner& runner() { return *runner_; }
  WebApp& web() { return *web_; }
  LogCache& log_cache() { return *cache_; }
  const ServiceConfig& config() const { return config_; }

 private:
  Executor& executor_for(const Host& host);
  // Runs `body` every `period` until stopped; exceptions are logged.
  void loop(const char* name, std::chrono::milliseconds period, const std::function<void()>& body);

  ServiceConfig config_;
  VcsAdapter& adapter_;
  const Clock& clock_;
  std::unique_ptr<Store> store_;
  LocalExecutor local_;
  SshExecutor ssh_;
  std::unique_ptr<NotificationHook> hook_;
  std::unique_ptr<Runner> runner_;
  std::unique_ptr<Poller> poller_;
  std::unique_ptr<ScheduleTimer> timer_;
  std::unique_ptr<LogCache> cache_;
  std::unique_ptr<WebApp> web_;
  std::unique_ptr<HttpServer> http_;
  int port_ = 0;

  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace buildmgr
