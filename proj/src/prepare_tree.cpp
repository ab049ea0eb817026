#include "buildmgr/error.hpp"
#include "buildmgr/executor.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

namespace {

void materialize(VcsAdapter& adapter, const ComponentName& name, const Revision& rev,
                 const fs::path& sync_dir, const fs::path& dest) {
  if (const auto* r = std::get_if<RepoRev>(&rev)) {
    adapter.export_tree(name, r->hash, dest);
  } else if (const auto* s = std::get_if<SyncedCopy>(&rev)) {
    const auto src = sync_dir / s->id;
    if (!is_identifier(s->id) || !fs::is_directory(src)) {
      throw Error(ErrorCode::MissingSyncedCopy, name.str() + ": " + src.string());
    }
    copy_tree_without_vcs(src, dest);
  } else {
    throw Error(ErrorCode::InvalidArgument, name.str() + " is not pinned to a revision");
  }
}

}  // namespace

PreparedTree prepare_tree(VcsAdapter& adapter, const BuildConfig& config,
                          const ComponentName& base_component, const fs::path& sync_dir,
                          const fs::path& dest, std::string description) {
  auto base = config.components.find(base_component);
  if (base == config.components.end()) {
    throw Error(ErrorCode::InvalidArgument, "config lacks base component " + base_component.str());
  }
  fs::remove_all(dest);
  fs::create_directories(dest.parent_path());
  materialize(adapter, base->first, base->second, sync_dir, dest);
  fs::create_directories(dest);
  for (const auto& [name, rev] : config.components) {
    if (name == base_component) continue;
    materialize(adapter, name, rev, sync_dir, dest / "components" / name.str());
  }
  return PreparedTree{dest, std::move(description)};
}

std::string env_dir_name(const JobName& job) {
  return job.kind.str() + "-" + std::to_string(job.serial);
}

}  // namespace buildmgr
