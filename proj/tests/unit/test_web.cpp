#include <doctest.h>
#include <httplib.h>

#include <set>

#include "buildmgr/assets.hpp"
#include "buildmgr/error.hpp"
#include "buildmgr/http_server.hpp"
#include "buildmgr/log_cache.hpp"
#include "buildmgr/log_format.hpp"
#include "buildmgr/render.hpp"
#include "buildmgr/web_app.hpp"
#include "../html_check.hpp"
#include "../runner_rig.hpp"

using namespace buildmgr;
using namespace testing;
using namespace std::chrono_literals;

namespace {

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

Result sample_result(const std::string& kind, std::int64_t serial, ResultStatus status) {
  Result r;
  r.name = JobName{kind == "user" ? BuildKind::user() : BuildKind::ci(kind), serial};
  r.status = status;
  r.component_revisions = {{"base", "0123456789ab"}};
  r.started_at = ts(kEpoch2025 + serial * 100);
  r.finished_at = ts(kEpoch2025 + serial * 100 + 50);
  r.log_ref = final_log_ref(r.name);
  return r;
}

Job sample_job(const std::string& kind, std::int64_t serial, std::vector<std::string> hosts) {
  Job j;
  j.name = JobName{BuildKind::ci(kind), serial};
  j.task_uuid = uuid_from(500 + serial);
  j.config = user_config();
  j.config.kind = j.name.kind;
  j.hosts = std::move(hosts);
  j.started_at = ts(kEpoch2025 + 1000);
  j.log_path = partial_log_ref(j.name);
  return j;
}

struct Web {
  RunnerRig rig;
  LogCache cache{rig.store_cfg.log_dir, rig.clock, 60s};
  WebApp app;
  explicit Web(WebConfig cfg = {{{"h1", true, 2, "local"}}})
      : app(rig.store, cache, std::move(cfg)) {}
};

}  // namespace

TEST_CASE("html escaping") {
  CHECK(html_escape("<a href=\"x\">&'</a>") == "&lt;a href=&quot;x&quot;&gt;&amp;&#39;&lt;/a&gt;");
  CHECK(html_escape("plain") == "plain");
}

TEST_CASE("dashboard") {
  SystemState s;
  s.hosts = {{"c1", true, 2, "local"}, {"c2", true, 1, "local"}, {"w1", false, 4, "local"}};
  s.running = {sample_job("nightly", 3, {"w1"})};
  s.results = {sample_result("nightly", 2, ResultStatus::Failed),
               sample_result("nightly", 1, ResultStatus::Ok)};
  s.queue = {make_task(1, user_config())};
  const auto html = render_dashboard(s);
  CHECK(html_problem(html) == "");
  CHECK(html == render_dashboard(s));
  CHECK(html.find("<th scope=\"row\">queued</th><td>1</td>") != std::string::npos);
  CHECK(html.find("<th scope=\"row\">running</th><td>1</td>") != std::string::npos);
  CHECK(html.find("<td>w1</td><td>1/4</td><td>no</td>") != std::string::npos);
  CHECK(html.find("<td>c1</td><td>0/2</td><td>member</td>") != std::string::npos);
  // The latest nightly is #2 (results arrive newest first).
  CHECK(html.find("<a href=\"/build/nightly/2\">nightly/2</a></td><td>failed</td>") !=
        std::string::npos);
  CHECK(html.find("<a href=\"/build/nightly/3\">") != std::string::npos);
  CHECK(html.find("<a href=\"/kind/user\">user</a>") != std::string::npos);
  CHECK(html.find("<script") == std::string::npos);

  SystemState empty;
  CHECK(render_dashboard(empty).find("No builds yet.") != std::string::npos);
}

TEST_CASE("dashboard marks hosts held by a cluster build") {
  SystemState s;
  s.hosts = {{"c1", true, 1, "local"}};
  auto j = sample_job("full", 1, {"c1"});
  j.config.host_spec = HostSpec::cluster();
  s.running = {j};
  CHECK(render_dashboard(s).find("<td>c1</td><td>0/1</td><td>in use</td>") != std::string::npos);
}

TEST_CASE("overview lists queued, running, then finished newest first") {
  std::vector<Result> results = {sample_result("nightly", 1, ResultStatus::Ok),
                                 sample_result("nightly", 2, ResultStatus::TimedOut),
                                 sample_result("other", 1, ResultStatus::Ok)};
  std::vector<Job> running = {sample_job("nightly", 3, {"h1"})};
  auto queued = make_task(9, user_config());
  queued.config.kind = BuildKind::ci("nightly");
  std::vector<Task> queue = {queued};
  const auto html = render_overview("nightly", results, running, queue);
  CHECK(html_problem(html) == "");
  const auto q = html.find("(not started)");
  const auto r3 = html.find("nightly/3");
  const auto r2 = html.find("nightly/2");
  const auto r1 = html.find("nightly/1");
  CHECK(q < r3);
  CHECK(r3 < r2);
  CHECK(r2 < r1);
  CHECK(html.find("other/1") == std::string::npos);
  CHECK(html.find("timed_out") != std::string::npos);
  CHECK(render_overview("none", results, running, queue).find("No builds of this kind.") !=
        std::string::npos);
}

TEST_CASE("build pages") {
  const LogView log{"line <1>\n", false};
  SUBCASE("finished build: no cancel form even when private") {
    BuildPage p;
    p.result = sample_result("nightly", 2, ResultStatus::Ok);
    p.private_uuid = uuid_from(1);
    const auto html = render_build(p, log);
    CHECK(html_problem(html) == "");
    CHECK(html.find("<form") == std::string::npos);
    CHECK(html.find("<pre>line &lt;1&gt;\n</pre>") != std::string::npos);
  }
  SUBCASE("running build: cancel form only on the private page") {
    BuildPage p;
    p.job = sample_job("nightly", 3, {"h1"});
    CHECK(render_build(p, log).find("<form") == std::string::npos);
    p.private_uuid = uuid_from(1);
    const auto html = render_build(p, log);
    CHECK(html_problem(html) == "");
    CHECK(html.find("<form method=\"post\" action=\"/private/" + uuid_from(1).str() +
                    "/cancel\">") != std::string::npos);
  }
  SUBCASE("queued task") {
    BuildPage p;
    p.task = make_task(1, user_config());
    p.private_uuid = uuid_from(1);
    const auto html = render_build(p, {});
    CHECK(html_problem(html) == "");
    CHECK(html.find("queued") != std::string::npos);
    CHECK(html.find("<form") != std::string::npos);
    CHECK(html.find("<h2>Log</h2>") == std::string::npos);
  }
  SUBCASE("missing and truncated logs") {
    BuildPage p;
    p.result = sample_result("nightly", 2, ResultStatus::Ok);
    CHECK(render_build(p, {}).find("Log unavailable.") != std::string::npos);
    CHECK(render_build(p, {"x\n", true}).find("Log truncated.") != std::string::npos);
  }
}

TEST_CASE("shell page and assets") {
  const auto shell = render_shell("/kind/nightly");
  CHECK(html_problem(shell) == "");
  CHECK(shell.find("src=\"/assets/client.js\"") != std::string::npos);
  CHECK(shell.find("<iframe id=\"content\" src=\"/kind/nightly\"") != std::string::npos);
  CHECK(std::string(builtin_client_script()).find("HEAD") != std::string::npos);
  CHECK(std::string(builtin_client_script()).find("ETag") != std::string::npos);
  CHECK_FALSE(builtin_stylesheet().empty());
}

TEST_CASE("log cache") {
  TempDir dir;
  SimClock clock{TimePoint(std::chrono::seconds(kEpoch2025))};
  const auto r = sample_result("nightly", 1, ResultStatus::Ok);
  write_file_atomic(dir / r.log_ref, gzip("the log\n"));
  int reads = 0;
  LogCache cache(dir.path(), clock, 60s, [&](const fs::path& p) {
    ++reads;
    return read_file(p);
  });

  for (int k = 0; k < 5; ++k) {
    CHECK(cache.get(r) == "the log\n");
    clock.advance(59s);  // each access refreshes the entry
  }
  CHECK(cache.decompressions() == 1);
  CHECK(reads == 1);
  clock.advance(2s);  // 61 s idle
  cache.evict_expired();
  CHECK(cache.size() == 0);
  CHECK(cache.get(r) == "the log\n");
  CHECK(cache.decompressions() == 2);

  auto missing = sample_result("nightly", 9, ResultStatus::Ok);
  LogCache plain(dir.path(), clock);
  try {
    plain.get(missing);
    FAIL("expected LogMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LogMissing);
  }
}

TEST_CASE("routes") {
  Web w;
  SUBCASE("pages") {
    for (const char* path : {"/", "/app", "/app/kind/user", "/kind/user", "/kind/nothing"}) {
      CAPTURE(path);
      const auto r = w.app.handle("GET", path);
      CHECK(r.status == 200);
      CHECK(r.header("content-type") == "text/html; charset=utf-8");
      CHECK(html_problem(r.body) == "");
      CHECK(r.header("ETag") == entity_tag(r.body));
    }
    CHECK(w.app.handle("GET", "/app/kind/user").body.find("src=\"/kind/user\"") !=
          std::string::npos);
    CHECK(w.app.handle("GET", "/assets/client.js").header("Content-Type").starts_with(
        "text/javascript"));
    CHECK(w.app.handle("GET", "/?refresh=1").status == 200);
  }
  SUBCASE("not found") {
    for (const char* path : {"/nope", "/build/user/1", "/build/user/x", "/build/user/01",
                             "/kind/a/b", "/assets/other.js", "/private/zzz",
                             "/private/00000000-0000-4000-8000-000000000001"}) {
      CAPTURE(path);
      const auto r = w.app.handle("GET", path);
      CHECK(r.status == 404);
      CHECK(html_problem(r.body) == "");
    }
  }
  SUBCASE("methods") {
    auto r = w.app.handle("POST", "/");
    CHECK(r.status == 405);
    CHECK(r.header("Allow") == "GET, HEAD");
    r = w.app.handle("GET", "/private/" + uuid_from(1).str() + "/cancel");
    CHECK(r.status == 404);  // unknown uuid
    w.rig.enqueue(1, w.rig.config());
    r = w.app.handle("GET", "/private/" + uuid_from(1).str() + "/cancel");
    CHECK(r.status == 405);
    CHECK(r.header("Allow") == "POST");
    CHECK(w.app.handle("DELETE", "/nope").status == 404);
  }
  SUBCASE("HEAD matches GET without a body") {
    const auto get = w.app.handle("GET", "/");
    const auto head = w.app.handle("HEAD", "/");
    CHECK(head.status == 200);
    CHECK(head.body.empty());
    CHECK(head.header("ETag") == get.header("ETag"));
  }
}

TEST_CASE("private pages and cancellation") {
  Web w;
  const auto t = w.rig.enqueue(1, w.rig.config());
  const auto url = "/private/" + t.uuid.str();

  SUBCASE("cancel while queued") {
    auto page = w.app.handle("GET", url);
    CHECK(page.status == 200);
    CHECK(page.body.find("<form") != std::string::npos);
    const auto r = w.app.handle("POST", url + "/cancel");
    CHECK(r.status == 200);
    CHECK(html_problem(r.body) == "");
    CHECK(r.body.find("The build was removed from the queue.") != std::string::npos);
    page = w.app.handle("GET", url);
    CHECK(page.status == 200);
    CHECK(page.body.find("cancelled before it started") != std::string::npos);
    CHECK(page.body.find("<form") == std::string::npos);
    CHECK(w.app.handle("POST", url + "/cancel").body.find("nothing to cancel") !=
          std::string::npos);
  }
  SUBCASE("cancel a running build, then see the result") {
    w.rig.runner->cycle();
    CHECK(w.app.handle("GET", "/build/user/1").status == 200);
    const auto r = w.app.handle("POST", url + "/cancel");
    REQUIRE(w.rig.drain());
    const auto page = w.app.handle("GET", url);
    CHECK(page.body.find("<h1>user/1</h1>") != std::string::npos);
    CHECK(page.body.find("<form") == std::string::npos);
    const auto status = w.rig.store.results().at(0).status;
    // The fixture build may finish before the cancel lands.
    CHECK((status == ResultStatus::Cancelled || status == ResultStatus::Ok));
    if (r.body.find("Cancellation requested.") != std::string::npos) {
      CHECK(status == ResultStatus::Cancelled);
    }
  }
  SUBCASE("wrong uuid") {
    const auto other = "/private/" + uuid_from(2).str();
    CHECK(w.app.handle("GET", other).status == 404);
    CHECK(w.app.handle("POST", other + "/cancel").status == 404);
    CHECK(w.rig.store.queued_tasks().size() == 1);
  }
}

TEST_CASE("etag changes with state, not with time") {
  Web w;
  const auto before = w.app.handle("HEAD", "/").header("ETag");
  w.rig.clock.advance(1h);
  CHECK(w.app.handle("HEAD", "/").header("ETag") == before);
  w.rig.enqueue(1, w.rig.config());
  const auto after = w.app.handle("HEAD", "/").header("ETag");
  CHECK(after != before);
}

TEST_CASE("a running build's log grows on its page") {
  Web w({{{"h1", false, 1, "local"}}});
  w.rig.enqueue(1, w.rig.config());
  const JobName name{BuildKind::user(), 1};
  const auto job = w.rig.store.claim_task(uuid_from(1), name, {"h1"}, w.rig.clock.now_seconds(),
                                          partial_log_ref(name));
  FileLogSink sink(w.rig.store_cfg.log_dir / job.log_path);
  sink.append("first\n");
  const auto one = w.app.handle("GET", "/build/user/1");
  CHECK(one.body.find("first") != std::string::npos);
  sink.append("second\n");
  const auto two = w.app.handle("GET", "/build/user/1");
  CHECK(two.body.find("second") != std::string::npos);
  CHECK(one.header("ETag") != two.header("ETag"));
}

TEST_CASE("long logs are cut at a line boundary") {
  WebConfig cfg;
  cfg.log_display_limit = 20;
  Web w(cfg);
  w.rig.enqueue(1, w.rig.config());
  const JobName name{BuildKind::user(), 1};
  w.rig.store.claim_task(uuid_from(1), name, {"h1"}, w.rig.clock.now_seconds(),
                         partial_log_ref(name));
  FileLogSink(w.rig.store_cfg.log_dir / partial_log_ref(name))
      .append("0123456789\nabcdefghij\nrest\n");
  const auto body = w.app.handle("GET", "/build/user/1").body;
  CHECK(body.find("<pre>0123456789\n</pre>") != std::string::npos);
  CHECK(body.find("Log truncated.") != std::string::npos);
}

TEST_CASE("assets directory overrides the built-ins") {
  TempDir assets;
  write_file_atomic(assets / "client.js", "// custom\n");
  WebConfig cfg;
  cfg.assets_dir = assets.path();
  Web w(cfg);
  CHECK(w.app.handle("GET", "/assets/client.js").body == "// custom\n");
  CHECK(w.app.handle("GET", "/assets/style.css").body == builtin_stylesheet());
}

TEST_CASE("over HTTP") {
  Web w;
  HttpServer server(w.app);
  const int port = server.bind("127.0.0.1", 0);
  std::thread th([&] { server.run(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  auto get = client.Get("/");
  REQUIRE(get);
  CHECK(get->status == 200);
  auto head = client.Head("/");
  REQUIRE(head);
  CHECK(head->status == 200);
  CHECK(head->body.empty());
  CHECK(head->get_header_value("ETag") == get->get_header_value("ETag"));
  CHECK(head->get_header_value("Content-Length") == std::to_string(get->body.size()));

  const auto t = w.rig.enqueue(1, w.rig.config());
  const std::string form = "application/x-www-form-urlencoded";
  auto cancel = client.Post("/private/" + t.uuid.str() + "/cancel", "", form);
  REQUIRE(cancel);
  CHECK(cancel->status == 200);
  CHECK(w.rig.store.queued_tasks().empty());
  auto wrong = client.Post("/private/" + uuid_from(3).str() + "/cancel", "", form);
  REQUIRE(wrong);
  CHECK(wrong->status == 404);
  auto put = client.Put("/", "", "text/plain");
  REQUIRE(put);
  CHECK(put->status == 405);

  server.stop();
  th.join();
}

TEST_CASE("public pages never show a task uuid") {
  Web w;
  std::vector<std::string> secrets;
  for (std::uint64_t n = 1; n <= 3; ++n) {
    auto c = w.rig.config();
    c.components.insert_or_assign(ComponentName("base"),
                                  SyncedCopy{uuid_from(n).str() + "_base"});
    secrets.push_back(w.rig.enqueue(n, c).uuid.str());
  }
  const JobName name{BuildKind::user(), 1};
  w.rig.store.claim_task(uuid_from(1), name, {"h1"}, w.rig.clock.now_seconds(),
                         partial_log_ref(name));
  FileLogSink(w.rig.store_cfg.log_dir / partial_log_ref(name))
      .append(log_header(name, w.rig.store.find_job(name)->config, w.rig.clock.now_seconds()));

  std::set<std::string> seen{"/"};
  std::vector<std::string> todo{"/"};
  while (!todo.empty()) {
    const auto path = todo.back();
    todo.pop_back();
    const auto r = w.app.handle("GET", path);
    CAPTURE(path);
    REQUIRE(r.status == 200);
    for (const auto& s : secrets) CHECK(r.body.find(s) == std::string::npos);
    for (auto pos = r.body.find("href=\""); pos != std::string::npos;
         pos = r.body.find("href=\"", pos + 1)) {
      const auto end = r.body.find('"', pos + 6);
      const auto link = r.body.substr(pos + 6, end - pos - 6);
      if (link.starts_with("/") && !link.starts_with("/assets/") && seen.insert(link).second) {
        todo.push_back(link);
      }
    }
  }
  CHECK(seen.contains("/build/user/1"));
}
