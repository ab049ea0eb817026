// buildmgr: service launcher, build submission and database rebuild.

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "buildmgr/commands.hpp"
#include "buildmgr/error.hpp"

namespace fs = std::filesystem;
using namespace buildmgr;

namespace {

fs::path config_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BUILDMGR_CONFIG")) return env;
  return "buildmgr.json";
}

// BUILDMGR_STORE overrides the configured database, e.g. to reach a
// forwarded copy from a client machine.
ServiceConfig load(const std::string& flag) {
  auto config = load_config(config_path(flag));
  if (const char* store = std::getenv("BUILDMGR_STORE"); store && *store) {
    config.store.connection = store;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build manager"};
  app.require_subcommand(1);
  std::string config_flag;
  app.add_option("--config", config_flag, "Service configuration file (default: $BUILDMGR_CONFIG or ./buildmgr.json)");

  auto* serve = app.add_subcommand("serve", "Run the service");

  SubmitOptions opts;
  std::int64_t timeout = 0;
  auto* submit = app.add_subcommand("submit", "Submit the current workspace for building");
  submit->add_option("SESSIONS", opts.sessions, "Sessions to build");
  submit->add_option("-x", opts.exclude_sessions, "Exclude session")->allow_extra_args(false);
  submit->add_option("-o", opts.options, "Build option NAME=VALUE")->allow_extra_args(false);
  submit->add_option("--component", opts.components, "Component NAME[=REV]")->allow_extra_args(false);
  submit->add_flag("--cluster", opts.cluster, "Run on the whole cluster");
  submit->add_option("--priority", opts.priority, "low, normal or high")
      ->check(CLI::IsMember({"low", "normal", "high"}));
  auto* timeout_opt = submit->add_option("--timeout", timeout, "Timeout in seconds")
                          ->check(CLI::PositiveNumber);
  std::string server;
  auto* server_opt = submit->add_option("--server", server, "Base URL for the printed link");

  auto* rebuild = app.add_subcommand("rebuild-db", "Reconstruct the database from the build logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  ServiceConfig config;
  try {
    config = load(config_flag);
  } catch (const Error& e) {
    std::cerr << "buildmgr: " << e.what() << "\n";
    return kExitUsage;
  }

  if (serve->parsed()) return cmd_serve(config, std::cerr);
  if (rebuild->parsed()) return cmd_rebuild_db(config, std::cout, std::cerr);
  if (submit->parsed()) {
    if (*timeout_opt) opts.timeout_seconds = timeout;
    if (*server_opt) opts.server = server;
    if (const char* user = std::getenv("USER")) opts.submitter = user;
    std::map<ComponentName, std::string> repositories;
    for (const auto& c : config.components) repositories.emplace(c.name, c.repository);
    HgAdapter adapter(repositories, {}, config.hg_command);
    return cmd_submit(config, opts, fs::current_path(), adapter, std::cout, std::cerr);
  }
  return kExitUsage;
}
