#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "buildmgr/core_model.hpp"
#include "buildmgr/store.hpp"
#include "buildmgr/vcs.hpp"

namespace buildmgr {

struct ChangeSummary {
  ComponentName component;
  std::string old_rev;
  std::string new_rev;
  // "<short-hash> <date> <author>: <summary>", oldest first.
  std::vector<std::string> entries;

  std::string text() const;
};

// Throws UnknownRevision.
ChangeSummary describe_changes(VcsAdapter& adapter, const ComponentName& component,
                               const std::string& old_rev, const std::string& new_rev);

using UuidSource = std::function<Uuid()>;

// Replaces every TipRev with the component's tip, taken from `tips` or, when
// absent there, from the adapter. Throws VcsUnavailable.
BuildConfig pin_template(VcsAdapter& adapter, const BuildConfig& config_template,
                         const std::map<ComponentName, std::string>& tips);

struct PollPlan {
  std::vector<Task> tasks;
  std::map<std::string, std::string> seen_updates;
  // Components whose repository could not be read this round.
  std::vector<ComponentName> unavailable;
};

// One polling round. A component seen for the first time is only recorded.
// Each OnCommit job whose trigger set contains a changed component yields one
// task pinned to the current tips; a changed component's seen revision only
// advances if every job it triggers produced its task.
PollPlan poll_once(VcsAdapter& adapter, const std::vector<ComponentName>& components,
                   const std::map<std::string, std::string>& seen,
                   const std::vector<CiJobSpec>& ci_jobs, Timestamp now,
                   const UuidSource& make_uuid = Uuid::generate);

class Poller {
 public:
  Poller(Store& store, VcsAdapter& adapter, std::vector<ComponentName> components,
         std::vector<CiJobSpec> ci_jobs, const Clock& clock)
      : store_(store),
        adapter_(adapter),
        components_(std::move(components)),
        ci_jobs_(std::move(ci_jobs)),
        clock_(clock) {}

  // Plans against the stored seen revisions and commits the plan atomically.
  PollOutcome cycle();

 private:
  Store& store_;
  VcsAdapter& adapter_;
  std::vector<ComponentName> components_;
  std::vector<CiJobSpec> ci_jobs_;
  const Clock& clock_;
};

}  // namespace buildmgr
