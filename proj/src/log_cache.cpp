#include "buildmgr/log_cache.hpp"

#include "buildmgr/codec.hpp"
#include "buildmgr/error.hpp"

namespace buildmgr {

namespace fs = std::filesystem;

namespace {

std::string read_log_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::LogMissing, path.string());
  return read_file(path);
}

}  // namespace

LogCache::LogCache(fs::path log_dir, const Clock& clock, std::chrono::milliseconds ttl,
                   Reader reader)
    : log_dir_(std::move(log_dir)),
      clock_(clock),
      ttl_(ttl),
      reader_(reader ? std::move(reader) : Reader(read_log_file)) {}

std::string LogCache::get(const Result& result) {
  std::unique_lock lock(mutex_);
  const auto now = clock_.now();
  evict_locked(now);
  if (auto it = entries_.find(result.name); it != entries_.end()) {
    it->second.last_access = now;
    return it->second.content;
  }
  lock.unlock();
  // Decompress outside the lock; a concurrent miss on the same build may
  // decode twice, which only costs time.
  std::string content = gunzip(reader_(log_dir_ / result.log_ref));
  lock.lock();
  ++decompressions_;
  auto& entry = entries_[result.name];
  entry.content = content;
  entry.last_access = now;
  return content;
}

std::string LogCache::live(const Job& job) const {
  return read_log_file(log_dir_ / job.log_path);
}

void LogCache::evict_expired() {
  std::lock_guard lock(mutex_);
  evict_locked(clock_.now());
}

void LogCache::evict_locked(TimePoint now) {
  std::erase_if(entries_, [&](const auto& kv) { return now - kv.second.last_access > ttl_; });
}

std::size_t LogCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t LogCache::decompressions() const {
  std::lock_guard lock(mutex_);
  return decompressions_;
}

}  // namespace buildmgr
