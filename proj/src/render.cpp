#include "buildmgr/render.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace buildmgr {

namespace {

std::string page(std::string_view title, std::string_view body) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
  out += html_escape(title);
  out += "</title>\n<link rel=\"stylesheet\" href=\"/assets/style.css\">\n</head>\n<body>\n";
  out += "<header><nav><a href=\"/\">Build manager</a></nav></header>\n<main>\n";
  out += body;
  out += "</main>\n</body>\n</html>\n";
  return out;
}

std::string build_link(const JobName& name) {
  return "<a href=\"/build/" + html_escape(name.kind.str()) + "/" + std::to_string(name.serial) +
         "\">" + html_escape(name.str()) + "</a>";
}

std::string kind_link(std::string_view kind) {
  return "<a href=\"/kind/" + html_escape(kind) + "\">" + html_escape(kind) + "</a>";
}

std::string time_cell(Timestamp ts) {
  const auto text = format_rfc3339(ts);
  return "<time datetime=\"" + text + "\">" + text + "</time>";
}

std::string status_text(const Job& job) {
  if (job.status == JobStatus::Interrupting) {
    return job.cause == EscalationCause::Timeout ? "timing out" : "cancelling";
  }
  return job.cancel_requested ? "cancel requested" : "running";
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string config_rows(const BuildConfig& config) {
  std::string out;
  auto row = [&](std::string_view key, const std::string& value) {
    out += "<tr><th scope=\"row\">" + html_escape(key) + "</th><td>" + html_escape(value) +
           "</td></tr>\n";
  };
  row("kind", config.kind.str());
  for (const auto& [component, rev] : config.components) {
    row("component " + component.str(), revision_token(rev));
  }
  row("sessions", join(config.sessions, " "));
  if (!config.exclude_sessions.empty()) row("excluded", join(config.exclude_sessions, " "));
  if (!config.options.empty()) row("options", join(config.options, " "));
  row("hosts", config.host_spec.is_cluster()
                   ? std::string("cluster")
                   : "single" + (config.host_spec.host_filter
                                     ? " (" + *config.host_spec.host_filter + ")"
                                     : std::string()));
  row("priority", std::string(to_string(config.priority)));
  row("timeout", std::to_string(config.timeout.count()) + " s");
  return out;
}

}  // namespace

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_dashboard(const SystemState& state) {
  std::string body = "<h1>Build manager</h1>\n";

  body += "<section>\n<h2>System</h2>\n<table>\n<tbody>\n";
  body += "<tr><th scope=\"row\">queued</th><td>" + std::to_string(state.queue.size()) +
          "</td></tr>\n";
  body += "<tr><th scope=\"row\">running</th><td>" + std::to_string(state.running.size()) +
          "</td></tr>\n";
  body += "<tr><th scope=\"row\">finished</th><td>" + std::to_string(state.results.size()) +
          "</td></tr>\n";
  body += "</tbody>\n</table>\n</section>\n";

  const auto occupancy = slot_occupancy(state.running);
  const auto cluster_held = cluster_hosts_in_use(state.running);
  body += "<section>\n<h2>Hosts</h2>\n<table>\n<thead><tr><th>host</th><th>slots used</th>"
          "<th>cluster</th></tr></thead>\n<tbody>\n";
  for (const auto& host : state.hosts) {
    const auto it = occupancy.find(host.name);
    const int used = it == occupancy.end() ? 0 : it->second;
    std::string cluster = host.cluster_member ? "member" : "no";
    if (cluster_held.contains(host.name)) cluster = "in use";
    body += "<tr><td>" + html_escape(host.name) + "</td><td>" + std::to_string(used) + "/" +
            std::to_string(host.single_slots) + "</td><td>" + cluster + "</td></tr>\n";
  }
  body += "</tbody>\n</table>\n</section>\n";

  std::set<std::string> kinds;
  for (const auto& t : state.queue) kinds.insert(t.config.kind.str());
  for (const auto& j : state.running) kinds.insert(j.name.kind.str());
  for (const auto& r : state.results) kinds.insert(r.name.kind.str());

  body += "<section>\n<h2>Builds</h2>\n";
  if (kinds.empty()) {
    body += "<p>No builds yet.</p>\n";
  } else {
    body += "<table>\n<thead><tr><th>kind</th><th>latest</th><th>status</th><th>finished</th>"
            "<th>running</th><th>queued</th></tr></thead>\n<tbody>\n";
    for (const auto& kind : kinds) {
      body += "<tr><td>" + kind_link(kind) + "</td>";
      // Results are newest first.
      auto latest = std::find_if(state.results.begin(), state.results.end(),
                                 [&](const Result& r) { return r.name.kind.str() == kind; });
      if (latest != state.results.end()) {
        body += "<td>" + build_link(latest->name) + "</td><td>" +
                std::string(to_string(latest->status)) + "</td><td>" +
                time_cell(latest->finished_at) + "</td>";
      } else {
        body += "<td></td><td></td><td></td>";
      }
      std::vector<std::string> running;
      for (const auto& j : state.running) {
        if (j.name.kind.str() == kind) running.push_back(build_link(j.name));
      }
      const auto queued = std::count_if(state.queue.begin(), state.queue.end(), [&](const Task& t) {
        return t.config.kind.str() == kind;
      });
      body += "<td>" + join(running, " ") + "</td><td>" + std::to_string(queued) + "</td></tr>\n";
    }
    body += "</tbody>\n</table>\n";
  }
  body += "</section>\n";
  return page("Build manager", body);
}

std::string render_overview(std::string_view kind, std::span<const Result> results,
                            std::span<const Job> running, std::span<const Task> queue) {
  std::string body = "<h1>Builds of kind " + html_escape(kind) + "</h1>\n";
  body += "<table>\n<thead><tr><th>build</th><th>status</th><th>started</th><th>finished</th>"
          "</tr></thead>\n<tbody>\n";
  std::size_t rows = 0;

  std::vector<const Task*> queued;
  for (const auto& t : queue) {
    if (t.config.kind.str() == kind) queued.push_back(&t);
  }
  std::sort(queued.begin(), queued.end(), [](const Task* a, const Task* b) {
    return std::tie(a->submitted_at, a->uuid) < std::tie(b->submitted_at, b->uuid);
  });
  for (const auto* t : queued) {
    body += "<tr><td>(not started)</td><td>queued since " + time_cell(t->submitted_at) +
            "</td><td></td><td></td></tr>\n";
    ++rows;
  }

  std::vector<const Job*> active;
  for (const auto& j : running) {
    if (j.name.kind.str() == kind && j.active()) active.push_back(&j);
  }
  std::sort(active.begin(), active.end(),
            [](const Job* a, const Job* b) { return a->name.serial > b->name.serial; });
  for (const auto* j : active) {
    body += "<tr><td>" + build_link(j->name) + "</td><td>" + status_text(*j) + "</td><td>" +
            time_cell(j->started_at) + "</td><td></td></tr>\n";
    ++rows;
  }

  std::vector<const Result*> finished;
  for (const auto& r : results) {
    if (r.name.kind.str() == kind) finished.push_back(&r);
  }
  std::sort(finished.begin(), finished.end(),
            [](const Result* a, const Result* b) { return a->name.serial > b->name.serial; });
  for (const auto* r : finished) {
    body += "<tr><td>" + build_link(r->name) + "</td><td>" + std::string(to_string(r->status)) +
            "</td><td>" + time_cell(r->started_at) + "</td><td>" + time_cell(r->finished_at) +
            "</td></tr>\n";
    ++rows;
  }
  body += "</tbody>\n</table>\n";
  if (rows == 0) body += "<p>No builds of this kind.</p>\n";
  return page("Builds: " + std::string(kind), body);
}

std::string render_build(const BuildPage& p, const LogView& log) {
  std::string title;
  std::string body;
  bool cancellable = false;

  if (p.result) {
    title = p.result->name.str();
  } else if (p.job) {
    title = p.job->name.str();
  } else {
    title = "Queued build";
  }
  body += "<h1>" + html_escape(title) + "</h1>\n";
  if (!p.notice.empty()) body += "<p><strong>" + html_escape(p.notice) + "</strong></p>\n";

  body += "<table>\n<tbody>\n";
  auto row = [&](std::string_view key, const std::string& value_html) {
    body += "<tr><th scope=\"row\">" + html_escape(key) + "</th><td>" + value_html + "</td></tr>\n";
  };

  if (p.result) {
    const auto& r = *p.result;
    row("status", std::string(to_string(r.status)));
    row("started", time_cell(r.started_at));
    row("finished", time_cell(r.finished_at));
    for (const auto& [component, rev] : r.component_revisions) {
      row("component " + component, html_escape(rev));
    }
  } else if (p.job) {
    const auto& j = *p.job;
    cancellable = j.active();
    row("status", status_text(j));
    row("started", time_cell(j.started_at));
    row("hosts", html_escape(join(j.hosts, " ")));
  } else if (p.task) {
    cancellable = true;
    row("status", "queued");
    row("submitted", time_cell(p.task->submitted_at));
  } else if (p.dequeued) {
    row("status", "cancelled before it started");
  }

  const BuildConfig* config = p.job ? &p.job->config : p.task ? &p.task->config : nullptr;
  if (config) body += config_rows(*config);
  const std::optional<std::string> submitter =
      p.job ? p.job->submitter : p.task ? p.task->submitter : std::nullopt;
  if (submitter) row("submitter", html_escape(*submitter));
  body += "</tbody>\n</table>\n";

  const std::string* description =
      p.job ? &p.job->description : p.task ? &p.task->description : nullptr;
  if (description && !description->empty()) {
    body += "<h2>Changes</h2>\n<pre>" + html_escape(*description) + "</pre>\n";
  }

  if (p.private_uuid && cancellable) {
    body += "<form method=\"post\" action=\"/private/" + p.private_uuid->str() +
            "/cancel\">\n<button type=\"submit\">Cancel build</button>\n</form>\n";
  }

  if (p.job || p.result) {
    body += "<h2>Log</h2>\n";
    if (!log.text) {
      body += "<p>Log unavailable.</p>\n";
    } else {
      body += "<pre>" + html_escape(*log.text) + "</pre>\n";
      if (log.truncated) body += "<p><em>Log truncated.</em></p>\n";
    }
  }
  return page(title, body);
}

std::string render_shell(std::string_view inner_path) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>Build manager</title>\n<link rel=\"stylesheet\" href=\"/assets/style.css\">\n";
  out += "<script src=\"/assets/client.js\" defer></script>\n</head>\n<body>\n";
  out += "<iframe id=\"content\" src=\"" + html_escape(inner_path) +
         "\" title=\"Build manager\" style=\"width:100%;border:0\"></iframe>\n";
  out += "</body>\n</html>\n";
  return out;
}

std::string render_error(int status, std::string_view message) {
  return page(std::to_string(status),
              "<h1>" + std::to_string(status) + "</h1>\n<p>" + html_escape(message) + "</p>\n");
}

}  // namespace buildmgr
