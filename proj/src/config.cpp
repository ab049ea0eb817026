#include "buildmgr/config.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"
#include "buildmgr/json_codec.hpp"

namespace buildmgr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& text) {
  fs::path p(text);
  return p.is_absolute() ? p.lexically_normal() : (base / p).lexically_normal();
}

std::chrono::milliseconds duration_field(const json& j, const char* key,
                                         std::chrono::milliseconds fallback) {
  if (!j.contains(key)) return fallback;
  const double seconds = j.at(key).get<double>();
  if (!(seconds > 0) || !std::isfinite(seconds)) {
    throw Error(ErrorCode::ConfigError, std::string(key) + " must be a positive number of seconds");
  }
  return std::chrono::milliseconds(std::llround(seconds * 1000));
}

json duration_json(std::chrono::milliseconds d) {
  if (d.count() % 1000 == 0) return d.count() / 1000;
  return static_cast<double>(d.count()) / 1000.0;
}

CiTrigger trigger_from_json(const json& j) {
  if (j.contains("on_commit")) {
    OnCommit t;
    for (const auto& c : j.at("on_commit")) t.components.insert(ComponentName(c.get<std::string>()));
    if (t.components.empty()) throw Error(ErrorCode::ConfigError, "on_commit needs components");
    return t;
  }
  if (j.contains("scheduled")) {
    const auto& s = j.at("scheduled");
    Scheduled t;
    const auto at = s.at("at").get<std::string>();
    auto minute = parse_time_of_day(at);
    if (!minute) throw Error(ErrorCode::ConfigError, "bad time of day '" + at + "'");
    t.minute_of_day = *minute;
    for (const auto& d : s.value("weekdays", json::array())) {
      const int day = d.get<int>();
      if (day < 0 || day > 6) throw Error(ErrorCode::ConfigError, "weekday out of range");
      t.weekdays.insert(static_cast<unsigned>(day));
    }
    return t;
  }
  throw Error(ErrorCode::ConfigError, "trigger needs on_commit or scheduled");
}

json trigger_to_json(const CiTrigger& trigger) {
  if (const auto* c = std::get_if<OnCommit>(&trigger)) {
    json names = json::array();
    for (const auto& n : c->components) names.push_back(n.str());
    return {{"on_commit", names}};
  }
  const auto& s = std::get<Scheduled>(trigger);
  return {{"scheduled", {{"at", format_time_of_day(s.minute_of_day)}, {"weekdays", s.weekdays}}}};
}

}  // namespace

std::optional<int> parse_time_of_day(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') return std::nullopt;
  int h = 0, m = 0;
  auto ok = [](std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
  };
  if (!ok(text.substr(0, 2), h) || !ok(text.substr(3, 2), m)) return std::nullopt;
  if (h < 0 || h > 23 || m < 0 || m > 59) return std::nullopt;
  return h * 60 + m;
}

std::string format_time_of_day(int minute_of_day) {
  const int h = minute_of_day / 60 % 24;
  const int m = minute_of_day % 60;
  return std::string{char('0' + h / 10), char('0' + h % 10), ':', char('0' + m / 10),
                     char('0' + m % 10)};
}

std::string ServiceConfig::base_url() const {
  if (!web.base_url.empty()) return web.base_url;
  return "http://" + web.address + ":" + std::to_string(web.port);
}

ServiceConfig service_config_from_json(const json& j, const fs::path& base_dir) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    ServiceConfig c;
    const auto& store = j.at("store");
    const auto connection = store.at("connection").get<std::string>();
    c.store.connection = connection == ":memory:" ? connection : resolve(base_dir, connection).string();
    c.store.log_dir = resolve(base_dir, store.at("log_dir").get<std::string>());
    c.store.sync_dir = resolve(base_dir, store.at("sync_dir").get<std::string>());
    c.work_dir = resolve(base_dir, j.value("work_dir", std::string("work")));
    c.base_component = ComponentName(j.value("base_component", std::string("base")));

    for (const auto& comp : j.at("components")) {
      auto repo = comp.value("repository", std::string());
      if (!repo.empty() && repo.find("://") == std::string::npos) {
        repo = resolve(base_dir, repo).string();
      }
      c.components.push_back({ComponentName(comp.at("name").get<std::string>()), repo});
    }
    for (const auto& h : j.at("hosts")) c.hosts.push_back(host_from_json(h));

    for (const auto& job : j.value("ci_jobs", json::array())) {
      CiJobSpec spec;
      spec.name = job.at("name").get<std::string>();
      if (spec.name == BuildKind::kUserKind || !is_identifier(spec.name)) {
        throw Error(ErrorCode::ConfigError, "bad CI job name '" + spec.name + "'");
      }
      spec.trigger = trigger_from_json(job.at("trigger"));
      json tmpl = job.at("config");
      tmpl["kind"] = spec.name;
      spec.config_template = config_from_json(tmpl);
      c.ci_jobs.push_back(std::move(spec));
    }

    c.build_command = j.value("build_command", c.build_command);
    c.grace_period = duration_field(j, "grace_period", c.grace_period);
    c.cache_ttl = duration_field(j, "cache_ttl", c.cache_ttl);
    c.poll_interval = duration_field(j, "poll_interval", c.poll_interval);
    c.runner_interval = duration_field(j, "runner_interval", c.runner_interval);

    if (j.contains("web")) {
      const auto& w = j.at("web");
      c.web.address = w.value("address", c.web.address);
      c.web.port = w.value("port", c.web.port);
      c.web.base_url = w.value("base_url", std::string());
      while (c.web.base_url.ends_with('/')) c.web.base_url.pop_back();
      if (w.contains("assets_dir")) {
        c.web.assets_dir = resolve(base_dir, w.at("assets_dir").get<std::string>());
      }
      c.web.log_display_limit = w.value("log_display_limit", c.web.log_display_limit);
    }
    c.notify_command = j.value("notify_command", std::vector<std::string>{});
    c.notify_file = j.contains("notify_file")
                        ? resolve(base_dir, j.at("notify_file").get<std::string>())
                        : c.work_dir / "notifications.log";
    if (j.contains("ssh")) {
      const auto& s = j.at("ssh");
      c.ssh_command = s.value("command", c.ssh_command);
      c.rsync_command = s.value("rsync_command", c.rsync_command);
      c.remote_base = s.value("remote_base", c.remote_base);
    }
    c.hg_command = j.value("hg_command", c.hg_command);
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

json service_config_to_json(const ServiceConfig& c) {
  json components = json::array();
  for (const auto& comp : c.components) {
    components.push_back({{"name", comp.name.str()}, {"repository", comp.repository}});
  }
  json hosts = json::array();
  for (const auto& h : c.hosts) hosts.push_back(host_to_json(h));
  json jobs = json::array();
  for (const auto& spec : c.ci_jobs) {
    json tmpl = config_to_json(spec.config_template);
    tmpl.erase("kind");
    jobs.push_back({{"name", spec.name}, {"trigger", trigger_to_json(spec.trigger)}, {"config", tmpl}});
  }
  json web = {{"address", c.web.address},
              {"port", c.web.port},
              {"log_display_limit", c.web.log_display_limit}};
  if (!c.web.base_url.empty()) web["base_url"] = c.web.base_url;
  if (c.web.assets_dir) web["assets_dir"] = c.web.assets_dir->string();
  return {
      {"store",
       {{"connection", c.store.connection},
        {"log_dir", c.store.log_dir.string()},
        {"sync_dir", c.store.sync_dir.string()}}},
      {"work_dir", c.work_dir.string()},
      {"base_component", c.base_component.str()},
      {"components", components},
      {"hosts", hosts},
      {"ci_jobs", jobs},
      {"build_command", c.build_command},
      {"grace_period", duration_json(c.grace_period)},
      {"cache_ttl", duration_json(c.cache_ttl)},
      {"poll_interval", duration_json(c.poll_interval)},
      {"runner_interval", duration_json(c.runner_interval)},
      {"web", web},
      {"notify_command", c.notify_command},
      {"notify_file", c.notify_file.string()},
      {"ssh",
       {{"command", c.ssh_command},
        {"rsync_command", c.rsync_command},
        {"remote_base", c.remote_base}}},
      {"hg_command", c.hg_command},
  };
}

ServiceConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, "cannot read " + path.string() + ": " + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return service_config_from_json(j, fs::absolute(path).parent_path());
}

void validate(const ServiceConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (c.hosts.empty()) fail("at least one host is required");
  std::set<std::string> host_names;
  for (const auto& h : c.hosts) {
    if (!host_names.insert(h.name).second) fail("duplicate host '" + h.name + "'");
  }
  std::set<ComponentName> declared;
  for (const auto& comp : c.components) {
    if (!declared.insert(comp.name).second) fail("duplicate component '" + comp.name.str() + "'");
  }
  if (!declared.contains(c.base_component)) {
    fail("base component '" + c.base_component.str() + "' is not declared");
  }
  std::set<std::string> job_names;
  for (const auto& spec : c.ci_jobs) {
    if (!job_names.insert(spec.name).second) fail("duplicate CI job '" + spec.name + "'");
    if (const auto* t = std::get_if<OnCommit>(&spec.trigger)) {
      for (const auto& comp : t->components) {
        if (!declared.contains(comp)) {
          fail("CI job '" + spec.name + "' triggers on undeclared component '" + comp.str() + "'");
        }
      }
    }
    for (const auto& [comp, rev] : spec.config_template.components) {
      if (!declared.contains(comp)) {
        fail("CI job '" + spec.name + "' uses undeclared component '" + comp.str() + "'");
      }
    }
    try {
      buildmgr::validate(spec.config_template, c.base_component, true);
    } catch (const Error& e) {
      fail("CI job '" + spec.name + "': " + e.what());
    }
  }
  if (c.build_command.empty()) fail("build_command is empty");
  if (c.web.port < 0 || c.web.port > 65535) fail("web port out of range");
}

}  // namespace buildmgr
