#include "buildmgr/core_model.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <charconv>
#include <tuple>

#include "buildmgr/error.hpp"

namespace buildmgr {

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '.' || c == '-';
  });
}

bool is_revision_hash(std::string_view text) {
  if (text.size() < 12 || text.size() > 40) return false;
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

ComponentName::ComponentName(std::string name) : name_(std::move(name)) {
  // "." and ".." would escape the components/ directory.
  if (!is_identifier(name_) || name_ == "." || name_ == "..") {
    throw Error(ErrorCode::InvalidArgument, "bad component name '" + name_ + "'");
  }
}

std::string revision_token(const Revision& rev) {
  if (const auto* r = std::get_if<RepoRev>(&rev)) return r->hash;
  if (std::holds_alternative<SyncedCopy>(rev)) return "synced";
  return "tip";
}

BuildKind BuildKind::ci(std::string job_name) {
  if (!is_identifier(job_name) || job_name == kUserKind) {
    throw Error(ErrorCode::InvalidArgument, "bad CI job name '" + job_name + "'");
  }
  BuildKind k;
  k.ci_name_ = std::move(job_name);
  return k;
}

std::optional<BuildKind> BuildKind::parse(std::string_view text) {
  if (text == kUserKind) return user();
  if (!is_identifier(text)) return std::nullopt;
  return ci(std::string(text));
}

std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::Low: return "low";
    case Priority::Normal: return "normal";
    case Priority::High: return "high";
  }
  return "normal";
}

std::optional<Priority> parse_priority(std::string_view text) {
  if (text == "low") return Priority::Low;
  if (text == "normal") return Priority::Normal;
  if (text == "high") return Priority::High;
  return std::nullopt;
}

void validate(const BuildConfig& config, const ComponentName& base_component, bool allow_tip) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (config.components.empty()) fail("build config has no components");
  if (!config.components.contains(base_component)) {
    fail("build config lacks base component '" + base_component.str() + "'");
  }
  for (const auto& [name, rev] : config.components) {
    if (const auto* r = std::get_if<RepoRev>(&rev); r && !is_revision_hash(r->hash)) {
      fail("component '" + name.str() + "': bad revision '" + r->hash + "'");
    }
    if (const auto* s = std::get_if<SyncedCopy>(&rev); s && !is_identifier(s->id)) {
      fail("component '" + name.str() + "': bad synced copy id '" + s->id + "'");
    }
    if (std::holds_alternative<TipRev>(rev) && !allow_tip) {
      fail("component '" + name.str() + "' is not pinned to a revision");
    }
  }
  for (const auto& s : config.sessions) {
    if (std::find(config.exclude_sessions.begin(), config.exclude_sessions.end(), s) !=
        config.exclude_sessions.end()) {
      fail("session '" + s + "' is both selected and excluded");
    }
  }
  for (const auto& opt : config.options) {
    const auto eq = opt.find('=');
    if (eq == std::string::npos || eq == 0) fail("option '" + opt + "' is not NAME=VALUE");
  }
  if (config.timeout.count() <= 0) fail("timeout must be positive");
  if (config.host_spec.is_cluster() && config.host_spec.host_filter) {
    fail("cluster builds take no host filter");
  }
}

std::string JobName::str() const { return kind.str() + "/" + std::to_string(serial); }

std::optional<JobName> JobName::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto kind = BuildKind::parse(text.substr(0, slash));
  if (!kind) return std::nullopt;
  const auto digits = text.substr(slash + 1);
  if (digits.empty() || digits.front() == '0') return std::nullopt;
  std::int64_t serial = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), serial);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || serial <= 0) {
    return std::nullopt;
  }
  return JobName{*kind, serial};
}

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Running: return "running";
    case JobStatus::Interrupting: return "interrupting";
    case JobStatus::Finished: return "finished";
  }
  return "running";
}

std::string_view to_string(EscalationCause c) {
  switch (c) {
    case EscalationCause::None: return "none";
    case EscalationCause::Cancel: return "cancel";
    case EscalationCause::Timeout: return "timeout";
  }
  return "none";
}

std::string_view to_string(ResultStatus s) {
  switch (s) {
    case ResultStatus::Ok: return "ok";
    case ResultStatus::Failed: return "failed";
    case ResultStatus::Cancelled: return "cancelled";
    case ResultStatus::TimedOut: return "timed_out";
    case ResultStatus::Aborted: return "aborted";
  }
  return "aborted";
}

std::optional<ResultStatus> parse_result_status(std::string_view text) {
  for (auto s : {ResultStatus::Ok, ResultStatus::Failed, ResultStatus::Cancelled,
                 ResultStatus::TimedOut, ResultStatus::Aborted}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::map<std::string, int> slot_occupancy(std::span<const Job> running) {
  std::map<std::string, int> used;
  for (const auto& job : running) {
    if (!job.active() || job.config.host_spec.is_cluster()) continue;
    for (const auto& h : job.hosts) ++used[h];
  }
  return used;
}

std::set<std::string> cluster_hosts_in_use(std::span<const Job> running) {
  std::set<std::string> held;
  for (const auto& job : running) {
    if (job.active() && job.config.host_spec.is_cluster()) {
      held.insert(job.hosts.begin(), job.hosts.end());
    }
  }
  return held;
}

namespace {

bool matches_filter(const std::optional<std::string>& filter, const std::string& host) {
  return !filter || fnmatch(filter->c_str(), host.c_str(), 0) == 0;
}

}  // namespace

std::optional<std::vector<std::string>> select_hosts(const BuildConfig& config,
                                                     std::span<const Host> hosts,
                                                     std::span<const Job> running) {
  const auto used = slot_occupancy(running);

  if (config.host_spec.is_cluster()) {
    const bool cluster_busy = std::any_of(running.begin(), running.end(), [](const Job& j) {
      return j.active() && j.config.host_spec.is_cluster();
    });
    if (cluster_busy) return std::nullopt;
    std::vector<std::string> members;
    for (const auto& h : hosts) {
      if (!h.cluster_member) continue;
      if (used.contains(h.name)) return std::nullopt;
      members.push_back(h.name);
    }
    if (members.empty()) return std::nullopt;
    return members;
  }

  const auto held = cluster_hosts_in_use(running);
  const Host* best = nullptr;
  int best_free = 0;
  for (const auto& h : hosts) {
    if (!matches_filter(config.host_spec.host_filter, h.name) || held.contains(h.name)) continue;
    const auto it = used.find(h.name);
    const int free = h.single_slots - (it == used.end() ? 0 : it->second);
    if (free > best_free) {
      best = &h;
      best_free = free;
    }
  }
  if (!best) return std::nullopt;
  return std::vector<std::string>{best->name};
}

bool is_feasible(const BuildConfig& config, std::span<const Host> hosts,
                 std::span<const Job> running) {
  return select_hosts(config, hosts, running).has_value();
}

std::optional<Task> select_next(std::span<const Task> queue, std::span<const Host> hosts,
                                std::span<const Job> running) {
  const Task* best = nullptr;
  auto rank = [](const Task& t) {
    // Larger is better: high priority, then earlier submission, then smaller uuid.
    return std::make_tuple(static_cast<int>(t.config.priority), -t.submitted_at.time_since_epoch().count());
  };
  for (const auto& task : queue) {
    if (!is_feasible(task.config, hosts, running)) continue;
    if (!best || rank(task) > rank(*best) || (rank(task) == rank(*best) && task.uuid < best->uuid)) {
      best = &task;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

JobName assign_name(const BuildKind& kind, std::int64_t max_serial_so_far) {
  return JobName{kind, max_serial_so_far + 1};
}

TimeoutState timeout_status(const Job& job, TimePoint now) {
  return now - job.started_at > job.config.timeout ? TimeoutState::TimedOut : TimeoutState::Fine;
}

}  // namespace buildmgr
