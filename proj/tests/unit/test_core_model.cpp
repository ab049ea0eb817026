#include <doctest.h>

#include <algorithm>
#include <random>

#include "buildmgr/core_model.hpp"
#include "buildmgr/error.hpp"
#include "../oracle.hpp"
#include "../support.hpp"

using namespace buildmgr;
using namespace testing;

namespace {

Host host(std::string name, int slots, bool cluster = false) {
  return Host{std::move(name), cluster, slots, "local"};
}

Job running_job(const std::string& kind, std::int64_t serial, BuildConfig config,
                std::vector<std::string> hosts) {
  Job j;
  j.name = JobName{kind == "user" ? BuildKind::user() : BuildKind::ci(kind), serial};
  j.config = std::move(config);
  j.hosts = std::move(hosts);
  j.started_at = ts(kEpoch2025);
  return j;
}

BuildConfig cluster_config() {
  auto c = user_config();
  c.host_spec = HostSpec::cluster();
  return c;
}

}  // namespace

TEST_CASE("identifiers and revision hashes") {
  CHECK(is_identifier("afp-2025_1.x"));
  CHECK_FALSE(is_identifier(""));
  CHECK_FALSE(is_identifier("a/b"));
  CHECK_FALSE(is_identifier("a b"));
  CHECK(is_revision_hash("0123456789ab"));
  CHECK(is_revision_hash(std::string(40, 'f')));
  CHECK_FALSE(is_revision_hash("0123456789a"));
  CHECK_FALSE(is_revision_hash(std::string(41, 'a')));
  CHECK_FALSE(is_revision_hash("0123456789AB"));
  CHECK_THROWS_AS(ComponentName("a/b"), Error);
  CHECK_THROWS_AS(ComponentName(".."), Error);
}

TEST_CASE("build kinds") {
  CHECK(BuildKind::parse("user")->is_user());
  CHECK(BuildKind::parse("nightly")->str() == "nightly");
  CHECK_FALSE(BuildKind::parse("a/b"));
  CHECK_THROWS_AS(BuildKind::ci("user"), Error);
}

TEST_CASE("build config validation") {
  const ComponentName base("base");
  auto c = user_config();
  CHECK_NOTHROW(validate(c, base));

  SUBCASE("base component required") {
    c.components.clear();
    c.components.emplace(ComponentName("afp"), RepoRev{"0123456789ab"});
    CHECK_THROWS_AS(validate(c, base), Error);
  }
  SUBCASE("no components") {
    c.components.clear();
    CHECK_THROWS_AS(validate(c, base), Error);
  }
  SUBCASE("selected and excluded") {
    c.sessions = {"A", "B"};
    c.exclude_sessions = {"B"};
    CHECK_THROWS_AS(validate(c, base), Error);
  }
  SUBCASE("tip only in templates") {
    c.components.insert_or_assign(base, TipRev{});
    CHECK_THROWS_AS(validate(c, base), Error);
    CHECK_NOTHROW(validate(c, base, true));
  }
  SUBCASE("bad revision") {
    c.components.insert_or_assign(base, RepoRev{"xyz"});
    CHECK_THROWS_AS(validate(c, base), Error);
  }
  SUBCASE("options need NAME=VALUE") {
    c.options = {"novalue"};
    CHECK_THROWS_AS(validate(c, base), Error);
  }
  SUBCASE("timeout positive") {
    c.timeout = std::chrono::seconds(0);
    CHECK_THROWS_AS(validate(c, base), Error);
  }
}

TEST_CASE("job names") {
  CHECK(assign_name(BuildKind::ci("nightly"), 16).str() == "nightly/17");
  CHECK(assign_name(BuildKind::user(), 0).str() == "user/1");
  const auto a = assign_name(BuildKind::user(), 0);
  const auto b = assign_name(BuildKind::user(), a.serial);
  CHECK(b.serial == a.serial + 1);

  CHECK(JobName::parse("nightly/17")->serial == 17);
  CHECK_FALSE(JobName::parse("nightly/017"));
  CHECK_FALSE(JobName::parse("nightly/0"));
  CHECK_FALSE(JobName::parse("nightly/-1"));
  CHECK_FALSE(JobName::parse("nightly"));
  CHECK_FALSE(JobName::parse("a b/1"));
}

TEST_CASE("timeout boundary") {
  auto c = user_config();
  c.timeout = std::chrono::seconds(3600);
  auto job = running_job("user", 1, c, {"h1"});
  const TimePoint start = job.started_at;
  CHECK(timeout_status(job, start + std::chrono::seconds(3601)) == TimeoutState::TimedOut);
  CHECK(timeout_status(job, start + std::chrono::seconds(3600)) == TimeoutState::Fine);
  job.config.timeout = std::chrono::seconds(1);
  CHECK(timeout_status(job, start) == TimeoutState::Fine);
}

TEST_CASE("feasibility") {
  std::vector<Host> hosts = {host("h1", 1, true), host("h2", 1, true), host("h3", 1)};

  SUBCASE("one cluster build at a time") {
    std::vector<Job> running = {running_job("user", 1, cluster_config(), {"h1", "h2"})};
    CHECK_FALSE(is_feasible(cluster_config(), hosts, running));
  }
  SUBCASE("empty occupancy") {
    CHECK(is_feasible(user_config(), hosts, {}));
    CHECK(is_feasible(cluster_config(), hosts, {}));
  }
  SUBCASE("slots exhausted") {
    std::vector<Host> two = {host("a", 1), host("b", 1)};
    std::vector<Job> running = {running_job("user", 1, user_config(), {"a"}),
                                running_job("user", 2, user_config(), {"b"})};
    CHECK_FALSE(is_feasible(user_config(), two, running));
  }
  SUBCASE("single job on a cluster host blocks the cluster") {
    std::vector<Job> running = {running_job("user", 1, user_config(), {"h1"})};
    CHECK_FALSE(is_feasible(cluster_config(), hosts, running));
  }
  SUBCASE("single jobs on other hosts do not block the cluster") {
    std::vector<Job> running = {running_job("user", 1, user_config(), {"h3"})};
    CHECK(is_feasible(cluster_config(), hosts, running));
    CHECK(*select_hosts(cluster_config(), hosts, running) == std::vector<std::string>{"h1", "h2"});
  }
  SUBCASE("cluster needs a member") {
    std::vector<Host> none = {host("x", 2)};
    CHECK_FALSE(is_feasible(cluster_config(), none, {}));
  }
  SUBCASE("host filter") {
    auto c = user_config();
    c.host_spec = HostSpec::single("h3*");
    CHECK(*select_hosts(c, hosts, {}) == std::vector<std::string>{"h3"});
    c.host_spec = HostSpec::single("nomatch");
    CHECK_FALSE(is_feasible(c, hosts, {}));
  }
  SUBCASE("zero slots and no cluster membership is never selected") {
    std::vector<Host> dead = {host("d", 0)};
    CHECK_FALSE(is_feasible(user_config(), dead, {}));
    CHECK_FALSE(is_feasible(cluster_config(), dead, {}));
  }
  SUBCASE("most free slots wins, ties by configured order") {
    std::vector<Host> hs = {host("a", 1), host("b", 3), host("c", 3)};
    CHECK(select_hosts(user_config(), hs, {})->front() == "b");
    std::vector<Job> running = {running_job("user", 1, user_config(), {"b"})};
    CHECK(select_hosts(user_config(), hs, running)->front() == "c");
  }
}

TEST_CASE("select_next") {
  std::vector<Host> hosts = {host("h1", 1, true), host("h2", 1)};

  SUBCASE("blocked high-priority cluster task lets a normal task through") {
    auto a = make_task(1, cluster_config());
    a.config.priority = Priority::High;
    auto b = make_task(2, user_config(), kEpoch2025 + 1);
    std::vector<Job> running = {running_job("user", 1, cluster_config(), {"h1"})};
    auto next = select_next(std::vector<Task>{a, b}, hosts, running);
    REQUIRE(next);
    CHECK(next->uuid == b.uuid);
  }
  SUBCASE("empty queue") { CHECK_FALSE(select_next({}, hosts, {})); }
  SUBCASE("fifo among equals") {
    auto a = make_task(7, user_config(), kEpoch2025);
    auto b = make_task(3, user_config(), kEpoch2025 + 5);
    CHECK(select_next(std::vector<Task>{b, a}, hosts, {})->uuid == a.uuid);
  }
  SUBCASE("priority first") {
    auto a = make_task(1, user_config(), kEpoch2025);
    auto b = make_task(2, user_config(), kEpoch2025 + 5);
    b.config.priority = Priority::High;
    CHECK(select_next(std::vector<Task>{a, b}, hosts, {})->uuid == b.uuid);
  }
}

namespace {

struct RandomWorld {
  std::vector<Host> hosts;
  std::vector<Task> queue;
  std::vector<Job> running;
};

RandomWorld random_world(std::mt19937_64& rng) {
  RandomWorld w;
  const int nhosts = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int i = 0; i < nhosts; ++i) {
    w.hosts.push_back(host("h" + std::to_string(i), std::uniform_int_distribution<int>(0, 3)(rng),
                           rng() % 2 == 0));
  }
  const int ntasks = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int i = 0; i < ntasks; ++i) {
    auto c = user_config();
    if (rng() % 4 == 0) c.host_spec = HostSpec::cluster();
    else if (rng() % 3 == 0) c.host_spec = HostSpec::single("h" + std::to_string(rng() % nhosts));
    c.priority = static_cast<Priority>(rng() % 3);
    w.queue.push_back(make_task(rng(), c, kEpoch2025 + static_cast<std::int64_t>(rng() % 4)));
  }
  const int njobs = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int i = 0; i < njobs; ++i) {
    auto c = user_config();
    if (rng() % 5 == 0) {
      c.host_spec = HostSpec::cluster();
      std::vector<std::string> members;
      for (const auto& h : w.hosts) {
        if (h.cluster_member) members.push_back(h.name);
      }
      if (members.empty()) continue;
      w.running.push_back(running_job("user", i + 1, c, members));
    } else {
      w.running.push_back(running_job("user", i + 1, c, {w.hosts[rng() % nhosts].name}));
    }
  }
  return w;
}

}  // namespace

TEST_CASE("property: select_next agrees with a brute-force scan") {
  std::mt19937_64 rng(20250101);
  for (int iter = 0; iter < 3000; ++iter) {
    auto w = random_world(rng);
    const auto got = select_next(w.queue, w.hosts, w.running);
    const auto want = oracle_select(w.queue, w.hosts, w.running);
    REQUIRE(got.has_value() == want.has_value());
    if (got) CHECK(got->uuid == want->uuid);
    for (const auto& t : w.queue) {
      CHECK(is_feasible(t.config, w.hosts, w.running) == oracle_feasible(t.config, w.hosts, w.running));
    }
  }
}

TEST_CASE("property: select_next ignores queue order") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    auto w = random_world(rng);
    const auto first = select_next(w.queue, w.hosts, w.running);
    std::shuffle(w.queue.begin(), w.queue.end(), rng);
    const auto second = select_next(w.queue, w.hosts, w.running);
    REQUIRE(first.has_value() == second.has_value());
    if (first) CHECK(first->uuid == second->uuid);
  }
}

TEST_CASE("property: feasibility is monotone in freed capacity") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 1000; ++iter) {
    auto w = random_world(rng);
    if (w.queue.empty() || w.running.empty()) continue;
    const auto& cfg = w.queue.front().config;
    if (!is_feasible(cfg, w.hosts, w.running)) continue;
    auto fewer = w.running;
    fewer.erase(fewer.begin() + static_cast<long>(rng() % fewer.size()));
    CHECK(is_feasible(cfg, w.hosts, fewer));
  }
}
