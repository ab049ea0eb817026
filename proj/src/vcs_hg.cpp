#include <algorithm>
#include <charconv>

#include "buildmgr/error.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

namespace {

constexpr char kSep = '\x1f';

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (auto pos = text.find(sep); pos != std::string::npos; pos = text.find(sep, start)) {
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  out.push_back(text.substr(start));
  return out;
}

}  // namespace

HgAdapter::HgAdapter(std::map<ComponentName, std::string> repositories, CommandRunner runner,
                     std::string hg_command)
    : repositories_(std::move(repositories)),
      runner_(runner ? std::move(runner)
                     : CommandRunner([](const std::vector<std::string>& argv) {
                         return run_command(argv);
                       })),
      hg_(std::move(hg_command)) {}

const std::string& HgAdapter::repository(const ComponentName& component) const {
  auto it = repositories_.find(component);
  if (it == repositories_.end()) {
    throw Error(ErrorCode::VcsUnavailable, "no repository configured for " + component.str());
  }
  return it->second;
}

CommandOutput HgAdapter::run(const ComponentName& component, std::vector<std::string> args) {
  std::vector<std::string> argv = {hg_, "--repository", repository(component)};
  argv.insert(argv.end(), args.begin(), args.end());
  CommandOutput out;
  try {
    out = runner_(argv);
  } catch (const Error& e) {
    throw Error(ErrorCode::VcsUnavailable, e.what());
  }
  if (out.exit_code != 0) {
    if (out.err.find("unknown revision") != std::string::npos ||
        out.err.find("abort: unknown") != std::string::npos) {
      throw Error(ErrorCode::UnknownRevision, component.str() + ": " + out.err);
    }
    throw Error(ErrorCode::VcsUnavailable, component.str() + ": " + out.err);
  }
  return out;
}

std::string HgAdapter::tip(const ComponentName& component) {
  auto out = run(component, {"log", "--rev", "tip", "--template", "{node}"});
  std::string node = out.out;
  while (!node.empty() && (node.back() == '\n' || node.back() == ' ')) node.pop_back();
  if (!is_revision_hash(node)) {
    throw Error(ErrorCode::VcsUnavailable, component.str() + ": unexpected tip '" + node + "'");
  }
  return node;
}

std::vector<CommitInfo> HgAdapter::log_between(const ComponentName& component,
                                               const std::string& old_rev,
                                               const std::string& new_rev) {
  if (!is_revision_hash(old_rev) || !is_revision_hash(new_rev)) {
    throw Error(ErrorCode::UnknownRevision, old_rev + ".." + new_rev);
  }
  // Resolve both ends first so that an unknown revision is reported as such
  // rather than as an empty range.
  for (const auto& rev : {old_rev, new_rev}) {
    run(component, {"log", "--rev", rev, "--template", "{node}"});
  }
  const std::string revset = "sort((" + old_rev + "::" + new_rev + ") - " + old_rev + ", rev)";
  const std::string tmpl = std::string("{node}") + kSep + "{author|person}" + kSep +
                           "{date|hgdate}" + kSep + "{desc|firstline}\n";
  auto out = run(component, {"log", "--rev", revset, "--template", tmpl});
  std::vector<CommitInfo> commits;
  for (const auto& line : split(out.out, '\n')) {
    if (line.empty()) continue;
    const auto fields = split(line, kSep);
    if (fields.size() != 4) throw Error(ErrorCode::VcsUnavailable, "unparseable hg log line");
    CommitInfo c;
    c.hash = fields[0];
    c.author = fields[1];
    std::int64_t unix_time = 0;
    const auto& date = fields[2];
    std::from_chars(date.data(), date.data() + date.size(), unix_time);
    c.date = Timestamp(std::chrono::seconds(unix_time));
    c.summary = fields[3];
    commits.push_back(std::move(c));
  }
  return commits;
}

void HgAdapter::export_tree(const ComponentName& component, const std::string& rev,
                            const fs::path& dest) {
  if (!is_revision_hash(rev)) throw Error(ErrorCode::UnknownRevision, rev);
  fs::create_directories(dest.parent_path());
  run(component, {"archive", "--rev", rev, "--type", "files", dest.string()});
  std::error_code ec;
  fs::remove(dest / ".hg_archival.txt", ec);
}

}  // namespace buildmgr
