#pragma once

// HTTP semantics of the web interface, independent of any server library.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "buildmgr/log_cache.hpp"
#include "buildmgr/render.hpp"
#include "buildmgr/store.hpp"

namespace buildmgr {

struct WebConfig {
  std::vector<Host> hosts;
  std::size_t log_display_limit = 4 * 1024 * 1024;
  // Optional directory whose style.css / client.js override the built-ins.
  std::optional<std::filesystem::path> assets_dir;
};

struct Response {
  int status = 200;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  // First header with that (case-insensitive) name, or "".
  std::string header(std::string_view name) const;
};

// Strong entity tag over the exact body bytes.
std::string entity_tag(std::string_view body);

// Reads a build's log: live from the partial file while running, through the
// cache once finished. Throws LogMissing.
std::string log_for(const JobName& name, Store& store, LogCache& cache);

class WebApp {
 public:
  WebApp(Store& store, LogCache& cache, WebConfig config)
      : store_(store), cache_(cache), config_(std::move(config)) {}

  // `path` may carry a query string, which is ignored. `form` holds decoded
  // urlencoded POST fields.
  Response handle(std::string_view method, std::string_view path,
                  const std::map<std::string, std::string>& form = {});

 private:
  std::optional<Response> route(std::string_view path, bool post);
  Response build_page(BuildPage page);
  Response private_page(const Uuid& uuid, std::string notice);
  Response asset(std::string_view name);

  Store& store_;
  LogCache& cache_;
  WebConfig config_;
};

}  // namespace buildmgr
