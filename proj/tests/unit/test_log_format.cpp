#include <doctest.h>

#include <random>

#include "buildmgr/error.hpp"
#include "buildmgr/log_format.hpp"
#include "../support.hpp"

using namespace buildmgr;
using namespace testing;

namespace {

constexpr std::string_view kSample =
    "=== build_manager log v1\n"
    "name: nightly/17\n"
    "kind: nightly\n"
    "component.afp: fedcba9876543210\n"
    "component.base: 0123456789abcdef\n"
    "started: 2025-01-01T00:00:00Z\n"
    "=== output\n"
    "Building HOL ...\n"
    "=== end\n"
    "Finished HOL\n"
    "=== end\n"
    "status: failed\n"
    "finished: 2025-01-01T01:23:45Z\n";

}  // namespace

TEST_CASE("parse a complete log") {
  const auto meta = parse_log_meta(kSample);
  CHECK(meta.name.str() == "nightly/17");
  CHECK(meta.status == ResultStatus::Failed);
  CHECK(meta.component_revisions ==
        std::map<std::string, std::string>{{"afp", "fedcba9876543210"}, {"base", "0123456789abcdef"}});
  CHECK(meta.started_at == ts(kEpoch2025));
  CHECK(meta.finished_at == ts(kEpoch2025 + 5025));
}

TEST_CASE("writer produces the documented layout") {
  const JobName name{BuildKind::ci("nightly"), 17};
  std::string log = log_header(name, {{"afp", "fedcba9876543210"}, {"base", "0123456789abcdef"}},
                               ts(kEpoch2025));
  log += "Building HOL ...\n=== end\nFinished HOL";
  log += log_trailer(log, ResultStatus::Failed, ts(kEpoch2025 + 5025));
  CHECK(log == kSample);
}

TEST_CASE("truncated log parses as aborted") {
  std::string log(kSample.substr(0, kSample.find("Finished")));
  const auto meta = parse_log_meta(log);
  CHECK(meta.status == ResultStatus::Aborted);
  CHECK(meta.finished_at == meta.started_at);
  // Cut mid-line as well.
  CHECK(parse_log_meta(log + "partial li").status == ResultStatus::Aborted);
}

TEST_CASE("malformed headers") {
  CHECK_THROWS_AS(parse_log_meta("\x89PNG\r\n\x1a\n garbage"), Error);
  CHECK_THROWS_AS(parse_log_meta(""), Error);
  std::string no_output(kSample.substr(0, kSample.find("=== output")));
  CHECK_THROWS_AS(parse_log_meta(no_output), Error);
  std::string wrong_kind(kSample);
  wrong_kind.replace(wrong_kind.find("kind: nightly"), 13, "kind: weekly");
  CHECK_THROWS_AS(parse_log_meta(wrong_kind), Error);
  std::string bad_time(kSample);
  bad_time.replace(bad_time.find("2025-01-01T00:00:00Z"), 20, "yesterday");
  CHECK_THROWS_AS(parse_log_meta(bad_time), Error);
}

TEST_CASE("unknown header keys are tolerated") {
  std::string log(kSample);
  log.insert(log.find("started:"), "host: h1\n");
  CHECK(parse_log_meta(log).name.serial == 17);
}

TEST_CASE("log paths") {
  const JobName name{BuildKind::ci("nightly"), 17};
  CHECK(partial_log_ref(name) == "nightly/17.log.partial");
  CHECK(final_log_ref(name) == "nightly/17.log.gz");
}

TEST_CASE("property: header and trailer round trip for random results") {
  std::mt19937_64 rng(99);
  const ResultStatus statuses[] = {ResultStatus::Ok, ResultStatus::Failed, ResultStatus::Cancelled,
                                   ResultStatus::TimedOut, ResultStatus::Aborted};
  for (int i = 0; i < 500; ++i) {
    Result r;
    r.name = JobName{rng() % 2 ? BuildKind::user() : BuildKind::ci("job" + std::to_string(rng() % 5)),
                     static_cast<std::int64_t>(1 + rng() % 100000)};
    r.status = statuses[rng() % 5];
    const int ncomp = 1 + static_cast<int>(rng() % 4);
    for (int c = 0; c < ncomp; ++c) {
      std::string hash;
      const int len = 12 + static_cast<int>(rng() % 29);
      for (int k = 0; k < len; ++k) hash += "0123456789abcdef"[rng() % 16];
      r.component_revisions["c" + std::to_string(c)] = rng() % 5 == 0 ? "synced" : hash;
    }
    r.started_at = ts(kEpoch2025 + static_cast<std::int64_t>(rng() % 100000000));
    r.finished_at = r.started_at + std::chrono::seconds(rng() % 100000);
    r.log_ref = final_log_ref(r.name);

    std::string log = log_header(r.name, r.component_revisions, r.started_at);
    const int lines = static_cast<int>(rng() % 5);
    for (int k = 0; k < lines; ++k) log += rng() % 3 == 0 ? "=== end\n" : "output line\n";
    if (rng() % 2) log += "no newline";
    log += log_trailer(log, r.status, r.finished_at);
    CHECK(result_from_meta(parse_log_meta(log), r.log_ref) == r);
  }
}
