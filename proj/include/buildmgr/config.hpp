#pragma once

// Service configuration file (JSON). Relative paths are resolved against the
// directory holding the file. Example:
//
//   {
//     "store": {"connection": "state.db", "log_dir": "logs", "sync_dir": "sync"},
//     "work_dir": "work",
//     "base_component": "base",
//     "components": [{"name": "base", "repository": "/srv/repos/base"}],
//     "hosts": [{"name": "h1", "single_slots": 2, "cluster_member": true,
//                "address": "local"}],
//     "ci_jobs": [
//       {"name": "commit", "trigger": {"on_commit": ["base"]},
//        "config": {"components": {"base": "tip"}, "sessions": ["All"]}},
//       {"name": "nightly", "trigger": {"scheduled": {"at": "02:00", "weekdays": [1, 3, 5]}},
//        "config": {"components": {"base": "tip"}, "host_spec": {"mode": "cluster"}}}
//     ],
//     "build_command": "/usr/local/bin/build",
//     "grace_period": 30, "cache_ttl": 60, "poll_interval": 60, "runner_interval": 5,
//     "web": {"address": "127.0.0.1", "port": 8080, "base_url": "https://build.example.org"},
//     "notify_command": ["/usr/local/bin/notify-admin"]
//   }
//
// Durations are seconds.

#include <chrono>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "buildmgr/core_model.hpp"
#include "buildmgr/executor.hpp"
#include "buildmgr/store.hpp"

namespace buildmgr {

struct ComponentSpec {
  ComponentName name;
  // Local path or URL understood by hg.
  std::string repository;

  bool operator==(const ComponentSpec&) const = default;
};

struct WebSettings {
  std::string address = "127.0.0.1";
  int port = 8080;
  // Public prefix used in printed private URLs; defaults to http://address:port.
  std::string base_url;
  std::optional<std::filesystem::path> assets_dir;
  std::size_t log_display_limit = 4 * 1024 * 1024;

  bool operator==(const WebSettings&) const = default;
};

struct ServiceConfig {
  StoreConfig store;
  std::filesystem::path work_dir;
  ComponentName base_component{"base"};
  std::vector<ComponentSpec> components;
  std::vector<CiJobSpec> ci_jobs;
  std::vector<Host> hosts;
  std::string build_command = "build";
  std::chrono::milliseconds grace_period{std::chrono::seconds(30)};
  std::chrono::milliseconds cache_ttl{std::chrono::seconds(60)};
  std::chrono::milliseconds poll_interval{std::chrono::seconds(60)};
  std::chrono::milliseconds runner_interval{std::chrono::seconds(5)};
  WebSettings web;
  // Admin notifications go to notify_command when set, else to notify_file
  // (default <work_dir>/notifications.log).
  std::vector<std::string> notify_command;
  std::filesystem::path notify_file;
  std::vector<std::string> ssh_command = SshOptions{}.ssh_command;
  std::vector<std::string> rsync_command = SshOptions{}.rsync_command;
  std::string remote_base = SshOptions{}.remote_base;
  std::string hg_command = "hg";

  std::string base_url() const;
};

// Throws ConfigError.
ServiceConfig service_config_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir);
nlohmann::json service_config_to_json(const ServiceConfig& config);
ServiceConfig load_config(const std::filesystem::path& path);

// Cross-field checks: hosts present and uniquely named, the base component
// declared, CI job names unique and their components declared. Throws
// ConfigError.
void validate(const ServiceConfig& config);

// "HH:MM" -> minutes after midnight.
std::optional<int> parse_time_of_day(std::string_view text);
std::string format_time_of_day(int minute_of_day);

}  // namespace buildmgr
