#pragma once

// Brute-force reference for host selection and task choice, written directly
// from the scheduling rules rather than from the production code.

#include <fnmatch.h>

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "buildmgr/core_model.hpp"

namespace testing {

struct OracleState {
  std::map<std::string, int> single_jobs_on;  // host -> running single jobs
  std::set<std::string> cluster_held;
  bool cluster_active = false;
};

inline OracleState oracle_state(const std::vector<buildmgr::Job>& running) {
  OracleState s;
  for (const auto& j : running) {
    if (j.status == buildmgr::JobStatus::Finished) continue;
    if (j.config.host_spec.is_cluster()) {
      s.cluster_active = true;
      for (const auto& h : j.hosts) s.cluster_held.insert(h);
    } else {
      for (const auto& h : j.hosts) s.single_jobs_on[h] += 1;
    }
  }
  return s;
}

inline bool oracle_feasible(const buildmgr::BuildConfig& c,
                            const std::vector<buildmgr::Host>& hosts,
                            const std::vector<buildmgr::Job>& running) {
  const auto s = oracle_state(running);
  if (c.host_spec.is_cluster()) {
    if (s.cluster_active) return false;
    int members = 0;
    for (const auto& h : hosts) {
      if (!h.cluster_member) continue;
      ++members;
      if (s.single_jobs_on.count(h.name) && s.single_jobs_on.at(h.name) > 0) return false;
    }
    return members > 0;
  }
  for (const auto& h : hosts) {
    if (c.host_spec.host_filter &&
        ::fnmatch(c.host_spec.host_filter->c_str(), h.name.c_str(), 0) != 0) {
      continue;
    }
    if (s.cluster_held.count(h.name)) continue;
    const int used = s.single_jobs_on.count(h.name) ? s.single_jobs_on.at(h.name) : 0;
    if (used < h.single_slots) return true;
  }
  return false;
}

// Every feasible task whose (priority, submitted_at, uuid) no other feasible
// task beats; exactly one element unless the queue has duplicates.
inline std::optional<buildmgr::Task> oracle_select(const std::vector<buildmgr::Task>& queue,
                                                   const std::vector<buildmgr::Host>& hosts,
                                                   const std::vector<buildmgr::Job>& running) {
  std::vector<const buildmgr::Task*> feasible;
  for (const auto& t : queue) {
    if (oracle_feasible(t.config, hosts, running)) feasible.push_back(&t);
  }
  for (const auto* candidate : feasible) {
    bool beaten = false;
    for (const auto* other : feasible) {
      if (other == candidate) continue;
      const int pc = static_cast<int>(candidate->config.priority);
      const int po = static_cast<int>(other->config.priority);
      if (po > pc || (po == pc && other->submitted_at < candidate->submitted_at) ||
          (po == pc && other->submitted_at == candidate->submitted_at &&
           other->uuid < candidate->uuid)) {
        beaten = true;
        break;
      }
    }
    if (!beaten) return *candidate;
  }
  return std::nullopt;
}

}  // namespace testing
