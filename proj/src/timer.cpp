#include "buildmgr/timer.hpp"

#include <iostream>

#include "buildmgr/error.hpp"

namespace buildmgr {

using namespace std::chrono;

std::optional<Timestamp> latest_slot(const Scheduled& schedule, TimePoint now) {
  const auto today = floor<days>(now);
  for (int back = 0; back <= 7; ++back) {
    const sys_days day = today - days(back);
    if (!schedule.weekdays.empty() &&
        !schedule.weekdays.contains(weekday(day).c_encoding())) {
      continue;
    }
    const Timestamp instant = day + minutes(schedule.minute_of_day);
    if (instant <= now) return instant;
  }
  return std::nullopt;
}

std::vector<CiJobSpec> due_jobs(std::span<const CiJobSpec> specs,
                                const std::map<std::string, Timestamp>& last_fired,
                                TimePoint now) {
  std::vector<CiJobSpec> due;
  for (const auto& spec : specs) {
    const auto* schedule = std::get_if<Scheduled>(&spec.trigger);
    if (!schedule) continue;
    auto fired = last_fired.find(spec.name);
    if (fired == last_fired.end()) continue;
    auto slot = latest_slot(*schedule, now);
    if (slot && *slot > fired->second) due.push_back(spec);
  }
  return due;
}

Firing fire(const CiJobSpec& spec, TimePoint now, VcsAdapter& adapter,
            const UuidSource& make_uuid) {
  const auto& schedule = std::get<Scheduled>(spec.trigger);
  auto slot = latest_slot(schedule, now);
  if (!slot) throw Error(ErrorCode::InvalidArgument, spec.name + " has no slot before now");
  Firing f;
  f.task.uuid = make_uuid();
  f.task.config = pin_template(adapter, spec.config_template, {});
  f.task.submitted_at = to_timestamp(now);
  f.slot = *slot;
  return f;
}

std::size_t ScheduleTimer::cycle() {
  const auto now = clock_.now();
  auto state = store_.schedule_state();
  for (const auto& spec : ci_jobs_) {
    const auto* schedule = std::get_if<Scheduled>(&spec.trigger);
    if (!schedule || state.contains(spec.name)) continue;
    // First sighting: start counting from the latest slot so a fresh
    // deployment does not fire immediately.
    const auto seed = latest_slot(*schedule, now).value_or(to_timestamp(now));
    store_.set_last_fired(spec.name, seed);
    state[spec.name] = seed;
  }

  std::size_t fired = 0;
  for (const auto& spec : due_jobs(ci_jobs_, state, now)) {
    try {
      const auto f = fire(spec, now, adapter_);
      store_.commit_fire(f.task, spec.name, f.slot);
      ++fired;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::VcsUnavailable) throw;
      std::cerr << "timer: " << spec.name << " postponed: " << e.what() << "\n";
    }
  }
  return fired;
}

}  // namespace buildmgr
