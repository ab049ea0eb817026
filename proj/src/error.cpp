#include "buildmgr/error.hpp"

namespace buildmgr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ConnectionFailed: return "ConnectionFailed";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::DuplicateUuid: return "DuplicateUuid";
    case ErrorCode::AlreadyClaimed: return "AlreadyClaimed";
    case ErrorCode::StaleSerial: return "StaleSerial";
    case ErrorCode::AlreadyFinalized: return "AlreadyFinalized";
    case ErrorCode::MissingLog: return "MissingLog";
    case ErrorCode::LogDirMissing: return "LogDirMissing";
    case ErrorCode::LogMissing: return "LogMissing";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::VcsUnavailable: return "VcsUnavailable";
    case ErrorCode::UnknownRevision: return "UnknownRevision";
    case ErrorCode::MissingSyncedCopy: return "MissingSyncedCopy";
    case ErrorCode::HostUnreachable: return "HostUnreachable";
    case ErrorCode::TransferFailed: return "TransferFailed";
    case ErrorCode::SpawnFailed: return "SpawnFailed";
    case ErrorCode::SyncFailed: return "SyncFailed";
    case ErrorCode::StoreUnreachable: return "StoreUnreachable";
    case ErrorCode::LockHeld: return "LockHeld";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace buildmgr
