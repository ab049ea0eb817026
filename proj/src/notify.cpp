#include "buildmgr/notify.hpp"

#include <fstream>
#include <iostream>

#include "buildmgr/error.hpp"
#include "buildmgr/process.hpp"

namespace buildmgr {

std::string notification_line(const Result& result) {
  return format_rfc3339(result.finished_at) + "\t" + result.name.str() + "\t" +
         std::string(to_string(result.status)) + "\t" + result.log_ref + "\n";
}

void FileNotificationHook::notify(const Result& result) {
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << notification_line(result);
  if (!out.flush()) std::cerr << "cannot append notification to " << path_ << "\n";
}

void CommandNotificationHook::notify(const Result& result) {
  auto argv = command_;
  argv.push_back(result.name.str());
  argv.push_back(std::string(to_string(result.status)));
  argv.push_back(result.log_ref);
  try {
    auto out = run_command(argv);
    if (out.exit_code != 0) {
      std::cerr << "notification command exited " << out.exit_code << ": " << out.err;
    }
  } catch (const Error& e) {
    std::cerr << "notification command failed: " << e.what() << "\n";
  }
}

}  // namespace buildmgr
