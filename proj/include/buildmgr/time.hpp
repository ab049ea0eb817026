#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace buildmgr {

// Persisted timestamps have whole-second resolution so that they survive a
// round trip through the RFC 3339 text in log files.
using Timestamp = std::chrono::sys_seconds;
using TimePoint = std::chrono::system_clock::time_point;

inline Timestamp to_timestamp(TimePoint tp) {
  return std::chrono::floor<std::chrono::seconds>(tp);
}

// "2025-01-01T00:00:00Z"
std::string format_rfc3339(Timestamp ts);
std::optional<Timestamp> parse_rfc3339(std::string_view text);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() const = 0;
  Timestamp now_seconds() const { return to_timestamp(now()); }
};

class SystemClock final : public Clock {
 public:
  TimePoint now() const override { return std::chrono::system_clock::now(); }
};

// Manually driven clock for deterministic tests; safe to read from any thread.
class SimClock final : public Clock {
 public:
  explicit SimClock(TimePoint start) : ticks_(start.time_since_epoch().count()) {}

  TimePoint now() const override {
    return TimePoint(TimePoint::duration(ticks_.load()));
  }
  void set(TimePoint tp) { ticks_.store(tp.time_since_epoch().count()); }
  void advance(TimePoint::duration d) { ticks_.fetch_add(d.count()); }

 private:
  std::atomic<TimePoint::rep> ticks_;
};

}  // namespace buildmgr
