#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buildmgr/core_model.hpp"
#include "buildmgr/poller.hpp"
#include "buildmgr/store.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

// Most recent scheduled instant at or before `now` (UTC, no DST).
std::optional<Timestamp> latest_slot(const Scheduled& schedule, TimePoint now);

// Scheduled specs whose latest slot is strictly later than their last firing.
// Specs without a recorded firing are never due; the timer seeds them first.
// Missed slots collapse: only the latest one is reported.
std::vector<CiJobSpec> due_jobs(std::span<const CiJobSpec> specs,
                                const std::map<std::string, Timestamp>& last_fired,
                                TimePoint now);

struct Firing {
  Task task;
  Timestamp slot{};  // becomes the job's last-fired instant
};

// Instantiates the template pinned to current tips. Throws VcsUnavailable,
// leaving the job due.
Firing fire(const CiJobSpec& spec, TimePoint now, VcsAdapter& adapter,
            const UuidSource& make_uuid = Uuid::generate);

class ScheduleTimer {
 public:
  ScheduleTimer(Store& store, VcsAdapter& adapter, std::vector<CiJobSpec> ci_jobs,
                const Clock& clock)
      : store_(store), adapter_(adapter), ci_jobs_(std::move(ci_jobs)), clock_(clock) {}

  // Returns the number of tasks enqueued.
  std::size_t cycle();

 private:
  Store& store_;
  VcsAdapter& adapter_;
  std::vector<CiJobSpec> ci_jobs_;
  const Clock& clock_;
};

}  // namespace buildmgr
