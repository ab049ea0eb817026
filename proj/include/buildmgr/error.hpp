#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace buildmgr {

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  ConnectionFailed,
  SchemaMismatch,
  DuplicateUuid,
  AlreadyClaimed,
  StaleSerial,
  AlreadyFinalized,
  MissingLog,
  LogDirMissing,
  LogMissing,
  MalformedHeader,
  VcsUnavailable,
  UnknownRevision,
  MissingSyncedCopy,
  HostUnreachable,
  TransferFailed,
  SpawnFailed,
  SyncFailed,
  StoreUnreachable,
  LockHeld,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every fallible operation in the library throws this; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Conflicts a caller is expected to retry (claim races, busy backend).
  bool retryable() const noexcept {
    return code_ == ErrorCode::ConnectionFailed || code_ == ErrorCode::StaleSerial;
  }

 private:
  ErrorCode code_;
};

}  // namespace buildmgr
