#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "buildmgr/core_model.hpp"

namespace buildmgr {

// Decoded logs of finished builds, kept until unused for longer than the ttl.
// Safe for concurrent use.
class LogCache {
 public:
  // Reads the raw (compressed) bytes of a log file. Throws LogMissing.
  using Reader = std::function<std::string(const std::filesystem::path&)>;

  LogCache(std::filesystem::path log_dir, const Clock& clock,
           std::chrono::milliseconds ttl = std::chrono::seconds(60), Reader reader = {});

  // Decoded log of a finished build. Throws LogMissing.
  std::string get(const Result& result);

  // Current content of a running build's partial log, read from disk each
  // call. Throws LogMissing.
  std::string live(const Job& job) const;

  void evict_expired();
  std::size_t size() const;
  std::size_t decompressions() const;

 private:
  struct Entry {
    std::string content;
    TimePoint last_access;
  };

  void evict_locked(TimePoint now);

  std::filesystem::path log_dir_;
  const Clock& clock_;
  std::chrono::milliseconds ttl_;
  Reader reader_;
  mutable std::mutex mutex_;
  std::map<JobName, Entry> entries_;
  std::size_t decompressions_ = 0;
};

}  // namespace buildmgr
