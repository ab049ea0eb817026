#include "buildmgr/json_codec.hpp"

#include "buildmgr/error.hpp"

namespace buildmgr {

using nlohmann::json;

std::string revision_to_text(const Revision& rev) {
  if (const auto* r = std::get_if<RepoRev>(&rev)) return "rev:" + r->hash;
  if (const auto* s = std::get_if<SyncedCopy>(&rev)) return "synced:" + s->id;
  return "tip";
}

Revision revision_from_text(const std::string& text) {
  if (text == "tip") return TipRev{};
  if (text.starts_with("rev:")) return RepoRev{text.substr(4)};
  if (text.starts_with("synced:")) return SyncedCopy{text.substr(7)};
  throw Error(ErrorCode::InvalidArgument, "bad revision '" + text + "'");
}

json config_to_json(const BuildConfig& config) {
  json components = json::object();
  for (const auto& [name, rev] : config.components) components[name.str()] = revision_to_text(rev);
  json host_spec = {{"mode", config.host_spec.is_cluster() ? "cluster" : "single"}};
  if (config.host_spec.host_filter) host_spec["filter"] = *config.host_spec.host_filter;
  return {
      {"kind", config.kind.str()},
      {"components", components},
      {"sessions", config.sessions},
      {"exclude_sessions", config.exclude_sessions},
      {"options", config.options},
      {"host_spec", host_spec},
      {"priority", std::string(to_string(config.priority))},
      {"timeout", config.timeout.count()},
  };
}

BuildConfig config_from_json(const json& j) {
  try {
    BuildConfig c;
    auto kind = BuildKind::parse(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::InvalidArgument, "bad build kind");
    c.kind = *kind;
    for (const auto& [name, rev] : j.at("components").items()) {
      c.components.emplace(ComponentName(name), revision_from_text(rev.get<std::string>()));
    }
    c.sessions = j.value("sessions", std::vector<std::string>{});
    c.exclude_sessions = j.value("exclude_sessions", std::vector<std::string>{});
    c.options = j.value("options", std::vector<std::string>{});
    if (j.contains("host_spec")) {
      const auto& hs = j.at("host_spec");
      const auto mode = hs.value("mode", std::string("single"));
      if (mode == "cluster") {
        c.host_spec = HostSpec::cluster();
      } else if (mode == "single") {
        c.host_spec = HostSpec::single();
        if (hs.contains("filter")) c.host_spec.host_filter = hs.at("filter").get<std::string>();
      } else {
        throw Error(ErrorCode::InvalidArgument, "bad host mode '" + mode + "'");
      }
    }
    auto prio = parse_priority(j.value("priority", std::string("normal")));
    if (!prio) throw Error(ErrorCode::InvalidArgument, "bad priority");
    c.priority = *prio;
    c.timeout = std::chrono::seconds(j.value("timeout", std::int64_t{3600}));
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("build config: ") + e.what());
  }
}

json host_to_json(const Host& host) {
  return {{"name", host.name},
          {"cluster_member", host.cluster_member},
          {"single_slots", host.single_slots},
          {"address", host.address}};
}

Host host_from_json(const json& j) {
  try {
    Host h;
    h.name = j.at("name").get<std::string>();
    h.cluster_member = j.value("cluster_member", false);
    h.single_slots = j.value("single_slots", 1);
    h.address = j.value("address", std::string("local"));
    if (!is_identifier(h.name)) throw Error(ErrorCode::InvalidArgument, "bad host name '" + h.name + "'");
    if (h.single_slots < 0) throw Error(ErrorCode::InvalidArgument, "negative single_slots");
    return h;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("host: ") + e.what());
  }
}

}  // namespace buildmgr
