#pragma once

// Repository access for the poller, timer and tree preparation.

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "buildmgr/core_model.hpp"
#include "buildmgr/process.hpp"

namespace buildmgr {

struct CommitInfo {
  std::string hash;
  std::string author;
  Timestamp date{};
  std::string summary;  // first line of the message

  bool operator==(const CommitInfo&) const = default;
};

class VcsAdapter {
 public:
  virtual ~VcsAdapter() = default;

  // Throws VcsUnavailable.
  virtual std::string tip(const ComponentName& component) = 0;
  // Commits after `old_rev` up to and including `new_rev`, oldest first.
  // Throws UnknownRevision or VcsUnavailable.
  virtual std::vector<CommitInfo> log_between(const ComponentName& component,
                                              const std::string& old_rev,
                                              const std::string& new_rev) = 0;
  // Working tree at `rev` without any VCS metadata. Throws UnknownRevision.
  virtual void export_tree(const ComponentName& component, const std::string& rev,
                           const std::filesystem::path& dest) = 0;
};

// In-memory linear histories. Each commit carries the full file set of the
// tree at that point. Thread-safe.
class MockVcs final : public VcsAdapter {
 public:
  void add_component(const ComponentName& component);
  // Overlays `files` (relative path -> content) on the previous tree.
  std::string commit(const ComponentName& component,
                     const std::map<std::string, std::string>& files,
                     const std::string& author = "tester", const std::string& summary = "change",
                     Timestamp date = Timestamp(std::chrono::seconds(1735689600)));
  void set_available(bool available);
  std::size_t export_count() const;

  std::string tip(const ComponentName& component) override;
  std::vector<CommitInfo> log_between(const ComponentName& component, const std::string& old_rev,
                                      const std::string& new_rev) override;
  void export_tree(const ComponentName& component, const std::string& rev,
                   const std::filesystem::path& dest) override;

 private:
  struct Commit {
    CommitInfo info;
    std::map<std::string, std::string> files;
  };
  struct Repo {
    std::vector<Commit> commits;
  };

  Repo& repo(const ComponentName& component);
  void check_available() const;

  mutable std::mutex mutex_;
  std::map<ComponentName, Repo> repos_;
  bool available_ = true;
  std::size_t exports_ = 0;
  std::uint64_t counter_ = 0;
};

using CommandRunner = std::function<CommandOutput(const std::vector<std::string>& argv)>;

// Mercurial repositories driven through the `hg` command line. Every
// invocation names the repository explicitly and pins a revision.
class HgAdapter final : public VcsAdapter {
 public:
  HgAdapter(std::map<ComponentName, std::string> repositories, CommandRunner runner = {},
            std::string hg_command = "hg");

  std::string tip(const ComponentName& component) override;
  std::vector<CommitInfo> log_between(const ComponentName& component, const std::string& old_rev,
                                      const std::string& new_rev) override;
  void export_tree(const ComponentName& component, const std::string& rev,
                   const std::filesystem::path& dest) override;

 private:
  const std::string& repository(const ComponentName& component) const;
  CommandOutput run(const ComponentName& component, std::vector<std::string> args);

  std::map<ComponentName, std::string> repositories_;
  CommandRunner runner_;
  std::string hg_;
};

}  // namespace buildmgr
