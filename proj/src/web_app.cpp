#include "buildmgr/web_app.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "buildmgr/assets.hpp"
#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kHtml = "text/html; charset=utf-8";

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t start = 1;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    out.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  // "/" and "/kind/x/" both end in an empty segment
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

Response content(int status, std::string body, std::string_view type = kHtml) {
  Response r;
  r.status = status;
  r.headers.emplace_back("Content-Type", type);
  r.headers.emplace_back("Cache-Control", "no-cache");
  r.headers.emplace_back("ETag", entity_tag(body));
  r.body = std::move(body);
  return r;
}

Response error_page(int status, std::string_view message) {
  Response r;
  r.status = status;
  r.headers.emplace_back("Content-Type", kHtml);
  r.body = render_error(status, message);
  return r;
}

std::optional<std::int64_t> parse_serial(std::string_view text) {
  std::int64_t value = 0;
  if (text.empty() || (text.size() > 1 && text[0] == '0')) return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) return std::nullopt;
  return value;
}

}  // namespace

std::string Response::header(std::string_view name) const {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const auto wanted = lower(name);
  for (const auto& [key, value] : headers) {
    if (lower(key) == wanted) return value;
  }
  return {};
}

std::string entity_tag(std::string_view body) { return "\"" + sha256_hex(body) + "\""; }

std::string log_for(const JobName& name, Store& store, LogCache& cache) {
  if (auto job = store.find_job(name); job && job->active()) {
    try {
      return cache.live(*job);
    } catch (const Error& e) {
      // The job may have been finalized in the meantime.
      if (e.code() != ErrorCode::LogMissing) throw;
    }
  }
  auto result = store.find_result(name);
  if (!result) throw Error(ErrorCode::LogMissing, name.str());
  return cache.get(*result);
}

Response WebApp::handle(std::string_view method, std::string_view path,
                        const std::map<std::string, std::string>& /*form*/) {
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  if (path.empty() || path[0] != '/') return error_page(404, "Not found.");

  const bool head = method == "HEAD";
  const bool post = method == "POST";
  const bool cancel_route = path.starts_with("/private/") && path.ends_with("/cancel");

  if (cancel_route ? !post : !(head || method == "GET")) {
    auto r = error_page(405, "Method not allowed.");
    r.headers.emplace_back("Allow", cancel_route ? "POST" : "GET, HEAD");
    // Still tell an unknown path apart from a wrong method.
    auto probe = route(path, cancel_route);
    if (!probe || probe->status == 404) return error_page(404, "Not found.");
    return r;
  }

  auto response = route(path, post);
  if (!response) response = error_page(404, "Not found.");
  if (head) response->body.clear();
  return *response;
}

std::optional<Response> WebApp::route(std::string_view path, bool post) {
  const auto seg = split_path(path);

  if (seg.empty()) {
    auto state = store_.snapshot();
    state.hosts = config_.hosts;
    return content(200, render_dashboard(state));
  }

  if (seg[0] == "app") {
    std::string inner = "/";
    if (path.size() > 4) inner = std::string(path.substr(4));
    return content(200, render_shell(inner));
  }

  if (seg[0] == "assets" && seg.size() == 2) return asset(seg[1]);

  if (seg[0] == "kind" && seg.size() == 2) {
    if (!is_identifier(seg[1])) return std::nullopt;
    const auto state = store_.snapshot();
    return content(200, render_overview(seg[1], state.results, state.running, state.queue));
  }

  if (seg[0] == "build" && seg.size() == 3) {
    auto kind = BuildKind::parse(seg[1]);
    auto serial = parse_serial(seg[2]);
    if (!kind || !serial) return std::nullopt;
    const JobName name{*kind, *serial};
    BuildPage page;
    page.result = store_.find_result(name);
    if (!page.result) {
      auto job = store_.find_job(name);
      if (!job || !job->active()) return std::nullopt;
      page.job = std::move(job);
    }
    return build_page(std::move(page));
  }

  if (seg[0] == "private" && (seg.size() == 2 || (seg.size() == 3 && seg[2] == "cancel"))) {
    auto uuid = Uuid::parse(seg[1]);
    if (!uuid) return std::nullopt;
    if (seg.size() == 2) return private_page(*uuid, {});
    if (!post) return private_page(*uuid, {});
    if (!store_.known_uuid(*uuid)) return std::nullopt;
    std::string notice;
    switch (store_.request_cancel(*uuid)) {
      case CancelOutcome::Dequeued: notice = "The build was removed from the queue."; break;
      case CancelOutcome::CancelRequested: notice = "Cancellation requested."; break;
      case CancelOutcome::NotFound: notice = "The build has already finished; nothing to cancel.";
    }
    return private_page(*uuid, std::move(notice));
  }

  return std::nullopt;
}

Response WebApp::private_page(const Uuid& uuid, std::string notice) {
  BuildPage page;
  page.private_uuid = uuid;
  page.notice = std::move(notice);
  if (auto task = store_.find_task(uuid)) {
    page.task = std::move(task);
  } else if (auto job = store_.find_job(uuid)) {
    if (job->active()) {
      page.job = std::move(job);
    } else {
      page.result = store_.find_result(job->name);
      if (!page.result) page.job = std::move(job);
    }
  } else if (store_.known_uuid(uuid)) {
    page.dequeued = true;
  } else {
    return error_page(404, "No such build.");
  }
  return build_page(std::move(page));
}

Response WebApp::build_page(BuildPage page) {
  LogView log;
  const std::optional<JobName> name =
      page.result ? std::optional(page.result->name)
                  : page.job ? std::optional(page.job->name) : std::nullopt;
  if (name) {
    try {
      std::string text = log_for(*name, store_, cache_);
      if (text.size() > config_.log_display_limit) {
        auto cut = text.rfind('\n', config_.log_display_limit);
        text.resize(cut == std::string::npos ? config_.log_display_limit : cut + 1);
        log.truncated = true;
      }
      log.text = std::move(text);
    } catch (const Error&) {
      log.text.reset();
    }
  }
  return content(200, render_build(page, log));
}

Response WebApp::asset(std::string_view name) {
  std::string_view type;
  std::string_view builtin;
  if (name == "style.css") {
    type = "text/css; charset=utf-8";
    builtin = builtin_stylesheet();
  } else if (name == "client.js") {
    type = "text/javascript; charset=utf-8";
    builtin = builtin_client_script();
  } else {
    return error_page(404, "Not found.");
  }
  std::string body(builtin);
  if (config_.assets_dir) {
    const auto file = *config_.assets_dir / std::string(name);
    std::error_code ec;
    if (fs::is_regular_file(file, ec)) body = read_file(file);
  }
  return content(200, std::move(body), type);
}

}  // namespace buildmgr
