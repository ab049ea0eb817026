#include <algorithm>
#include <fstream>

#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

void MockVcs::add_component(const ComponentName& component) {
  std::lock_guard lock(mutex_);
  repos_.try_emplace(component);
}

std::string MockVcs::commit(const ComponentName& component,
                            const std::map<std::string, std::string>& files,
                            const std::string& author, const std::string& summary,
                            Timestamp date) {
  std::lock_guard lock(mutex_);
  auto& r = repos_[component];
  Commit c;
  if (!r.commits.empty()) c.files = r.commits.back().files;
  for (const auto& [path, content] : files) c.files[path] = content;
  const std::string parent = r.commits.empty() ? "" : r.commits.back().info.hash;
  c.info.hash = sha256_hex(component.str() + "\n" + parent + "\n" + std::to_string(++counter_) +
                           "\n" + summary)
                    .substr(0, 40);
  c.info.author = author;
  c.info.date = date;
  c.info.summary = summary;
  r.commits.push_back(std::move(c));
  return r.commits.back().info.hash;
}

void MockVcs::set_available(bool available) {
  std::lock_guard lock(mutex_);
  available_ = available;
}

std::size_t MockVcs::export_count() const {
  std::lock_guard lock(mutex_);
  return exports_;
}

MockVcs::Repo& MockVcs::repo(const ComponentName& component) {
  auto it = repos_.find(component);
  if (it == repos_.end()) {
    throw Error(ErrorCode::VcsUnavailable, "no repository for " + component.str());
  }
  return it->second;
}

void MockVcs::check_available() const {
  if (!available_) throw Error(ErrorCode::VcsUnavailable, "mock repository offline");
}

std::string MockVcs::tip(const ComponentName& component) {
  std::lock_guard lock(mutex_);
  check_available();
  const auto& r = repo(component);
  if (r.commits.empty()) throw Error(ErrorCode::VcsUnavailable, component.str() + " is empty");
  return r.commits.back().info.hash;
}

std::vector<CommitInfo> MockVcs::log_between(const ComponentName& component,
                                             const std::string& old_rev,
                                             const std::string& new_rev) {
  std::lock_guard lock(mutex_);
  check_available();
  const auto& commits = repo(component).commits;
  auto index_of = [&](const std::string& rev) -> std::size_t {
    for (std::size_t i = 0; i < commits.size(); ++i) {
      if (commits[i].info.hash == rev) return i;
    }
    throw Error(ErrorCode::UnknownRevision, component.str() + ":" + rev);
  };
  const auto from = index_of(old_rev);
  const auto to = index_of(new_rev);
  if (from > to) {
    throw Error(ErrorCode::UnknownRevision, old_rev + " is not an ancestor of " + new_rev);
  }
  std::vector<CommitInfo> out;
  for (auto i = from + 1; i <= to; ++i) out.push_back(commits[i].info);
  return out;
}

void MockVcs::export_tree(const ComponentName& component, const std::string& rev,
                          const fs::path& dest) {
  std::map<std::string, std::string> files;
  {
    std::lock_guard lock(mutex_);
    check_available();
    const auto& commits = repo(component).commits;
    auto it = std::find_if(commits.begin(), commits.end(),
                           [&](const Commit& c) { return c.info.hash == rev; });
    if (it == commits.end()) throw Error(ErrorCode::UnknownRevision, component.str() + ":" + rev);
    files = it->files;
    ++exports_;
  }
  fs::create_directories(dest);
  for (const auto& [path, content] : files) {
    const auto target = dest / path;
    fs::create_directories(target.parent_path());
    std::ofstream(target, std::ios::binary | std::ios::trunc) << content;
  }
}

}  // namespace buildmgr
