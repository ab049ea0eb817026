#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "buildmgr/core_model.hpp"

namespace buildmgr {

// Admin notification for failed or aborted builds.
class NotificationHook {
 public:
  virtual ~NotificationHook() = default;
  virtual void notify(const Result& result) = 0;
};

// One line per notification:
//   <finished RFC 3339>\t<name>\t<status>\t<log_ref>\n
std::string notification_line(const Result& result);

class FileNotificationHook final : public NotificationHook {
 public:
  explicit FileNotificationHook(std::filesystem::path path) : path_(std::move(path)) {}
  void notify(const Result& result) override;

 private:
  std::mutex mutex_;
  std::filesystem::path path_;
};

// Runs `command... <name> <status> <log_ref>`; failures are logged.
class CommandNotificationHook final : public NotificationHook {
 public:
  explicit CommandNotificationHook(std::vector<std::string> command)
      : command_(std::move(command)) {}
  void notify(const Result& result) override;

 private:
  std::vector<std::string> command_;
};

}  // namespace buildmgr
