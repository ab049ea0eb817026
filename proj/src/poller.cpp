#include "buildmgr/poller.hpp"

#include <iostream>
#include <set>

#include "buildmgr/error.hpp"

namespace buildmgr {

std::string ChangeSummary::text() const {
  std::string out = component.str() + " " + old_rev.substr(0, 12) + ".." + new_rev.substr(0, 12) +
                    "\n";
  for (const auto& e : entries) out += e + "\n";
  return out;
}

ChangeSummary describe_changes(VcsAdapter& adapter, const ComponentName& component,
                               const std::string& old_rev, const std::string& new_rev) {
  ChangeSummary summary{component, old_rev, new_rev, {}};
  if (old_rev == new_rev) return summary;
  for (const auto& c : adapter.log_between(component, old_rev, new_rev)) {
    summary.entries.push_back(c.hash.substr(0, 12) + " " + format_rfc3339(c.date) + " " +
                              c.author + ": " + c.summary);
  }
  return summary;
}

BuildConfig pin_template(VcsAdapter& adapter, const BuildConfig& config_template,
                         const std::map<ComponentName, std::string>& tips) {
  BuildConfig config = config_template;
  for (auto& [name, rev] : config.components) {
    if (!std::holds_alternative<TipRev>(rev)) continue;
    auto it = tips.find(name);
    rev = RepoRev{it != tips.end() ? it->second : adapter.tip(name)};
  }
  return config;
}

PollPlan poll_once(VcsAdapter& adapter, const std::vector<ComponentName>& components,
                   const std::map<std::string, std::string>& seen,
                   const std::vector<CiJobSpec>& ci_jobs, Timestamp now,
                   const UuidSource& make_uuid) {
  PollPlan plan;
  std::map<ComponentName, std::string> tips;
  std::set<ComponentName> changed;
  for (const auto& c : components) {
    try {
      tips[c] = adapter.tip(c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::VcsUnavailable && e.code() != ErrorCode::UnknownRevision) throw;
      plan.unavailable.push_back(c);
      continue;
    }
    auto it = seen.find(c.str());
    if (it == seen.end()) {
      plan.seen_updates[c.str()] = tips[c];
    } else if (it->second != tips[c]) {
      changed.insert(c);
    }
  }

  std::set<ComponentName> blocked;
  for (const auto& job : ci_jobs) {
    const auto* on_commit = std::get_if<OnCommit>(&job.trigger);
    if (!on_commit) continue;
    std::vector<ComponentName> triggers;
    for (const auto& c : on_commit->components) {
      if (changed.contains(c)) triggers.push_back(c);
    }
    if (triggers.empty()) continue;

    try {
      BuildConfig tmpl = job.config_template;
      for (const auto& c : triggers) tmpl.components.try_emplace(c, TipRev{});
      Task task;
      task.uuid = make_uuid();
      task.config = pin_template(adapter, tmpl, tips);
      task.submitted_at = now;
      for (const auto& c : triggers) {
        try {
          task.description += describe_changes(adapter, c, seen.at(c.str()), tips.at(c)).text();
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnknownRevision) throw;
          task.description += c.str() + " " + seen.at(c.str()).substr(0, 12) + ".." +
                              tips.at(c).substr(0, 12) + " (history unavailable)\n";
        }
      }
      plan.tasks.push_back(std::move(task));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::VcsUnavailable) throw;
      blocked.insert(triggers.begin(), triggers.end());
    }
  }

  for (const auto& c : changed) {
    if (!blocked.contains(c)) plan.seen_updates[c.str()] = tips[c];
  }
  return plan;
}

PollOutcome Poller::cycle() {
  const auto plan =
      poll_once(adapter_, components_, store_.seen_revisions(), ci_jobs_, clock_.now_seconds());
  for (const auto& c : plan.unavailable) {
    std::cerr << "poller: repository for " << c.str() << " unavailable, retrying next cycle\n";
  }
  if (plan.tasks.empty() && plan.seen_updates.empty()) return {};
  return store_.commit_poll(PollCommit{plan.tasks, plan.seen_updates});
}

}  // namespace buildmgr
