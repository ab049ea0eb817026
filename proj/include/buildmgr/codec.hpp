#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace buildmgr {

// gzip stream format. gunzip throws Error(Io) on corrupt or truncated input.
std::string gzip(std::string_view data);
std::string gunzip(std::string_view data);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace buildmgr
