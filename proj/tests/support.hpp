#pragma once

// Shared helpers for the unit and acceptance tests.

#include <stdlib.h>

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>

#include "buildmgr/core_model.hpp"
#include "buildmgr/store.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(BUILDMGR_FIXTURE_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "buildmgr-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline buildmgr::StoreConfig store_config(const fs::path& root, bool in_memory = false) {
  fs::create_directories(root / "logs");
  fs::create_directories(root / "sync");
  return {in_memory ? ":memory:" : (root / "state.db").string(), root / "logs", root / "sync"};
}

inline bool wait_until(const std::function<bool()>& pred,
                       std::chrono::milliseconds timeout = std::chrono::seconds(10),
                       std::chrono::milliseconds step = std::chrono::milliseconds(20)) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(step);
  }
  return pred();
}

inline buildmgr::Timestamp ts(std::int64_t seconds) {
  return buildmgr::Timestamp(std::chrono::seconds(seconds));
}

// 2025-01-01T00:00:00Z, a Wednesday.
inline constexpr std::int64_t kEpoch2025 = 1735689600;

inline buildmgr::Uuid uuid_from(std::uint64_t n) {
  std::array<std::uint8_t, 16> b{};
  for (int i = 0; i < 8; ++i) b[15 - i] = static_cast<std::uint8_t>(n >> (8 * i));
  b[6] = 0x40;
  b[8] = 0x80;
  return buildmgr::Uuid(b);
}

inline buildmgr::BuildConfig user_config(const std::string& base_rev = "0123456789ab") {
  buildmgr::BuildConfig c;
  c.kind = buildmgr::BuildKind::user();
  c.components.emplace(buildmgr::ComponentName("base"), buildmgr::RepoRev{base_rev});
  return c;
}

inline buildmgr::Task make_task(std::uint64_t n, buildmgr::BuildConfig config,
                                std::int64_t submitted = kEpoch2025) {
  buildmgr::Task t;
  t.uuid = uuid_from(n);
  t.config = std::move(config);
  t.submitted_at = ts(submitted);
  return t;
}

}  // namespace testing
