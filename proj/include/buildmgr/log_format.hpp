#pragma once

// Build log layout (UTF-8, LF line endings):
//
//   === build_manager log v1
//   name: nightly/17
//   kind: nightly
//   component.<name>: <revision-hash-or-"synced">
//   started: 2025-01-01T00:00:00Z
//   === output
//   <raw merged process output>
//   === end
//   status: ok | failed | cancelled | timed_out | aborted
//   finished: 2025-01-01T01:23:45Z
//
// Everything a Result holds can be recovered from these lines alone.

#include <map>
#include <string>
#include <string_view>

#include "buildmgr/core_model.hpp"

namespace buildmgr {

struct LogMeta {
  JobName name;
  ResultStatus status = ResultStatus::Aborted;
  std::map<std::string, std::string> component_revisions;
  Timestamp started_at{};
  Timestamp finished_at{};

  bool operator==(const LogMeta&) const = default;
};

inline constexpr std::string_view kLogMagic = "=== build_manager log v1";

// Header through the "=== output" line.
std::string log_header(const JobName& name, const std::map<std::string, std::string>& revisions,
                       Timestamp started_at);
std::string log_header(const JobName& name, const BuildConfig& config, Timestamp started_at);

// Trailer; `output_so_far` decides whether a newline is needed first.
std::string log_trailer(std::string_view output_so_far, ResultStatus status,
                        Timestamp finished_at);

// Throws Error(MalformedHeader). A log without a trailer parses as Aborted,
// finished at its start time.
LogMeta parse_log_meta(std::string_view log);

Result result_from_meta(const LogMeta& meta, std::string log_ref);

// Paths relative to the log directory.
std::string partial_log_ref(const JobName& name);  // <kind>/<serial>.log.partial
std::string final_log_ref(const JobName& name);    // <kind>/<serial>.log.gz

}  // namespace buildmgr
