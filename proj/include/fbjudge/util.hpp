/// @file util.hpp
/// @brief Small helpers: hashing, file IO, timestamps, number formatting.

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>

namespace fbjudge {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// True when `s` is empty or contains only ASCII whitespace.
bool is_blank(std::string_view s) noexcept;

/// Reads a whole file. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory, then renames. Creates parent
/// directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// ISO-8601 UTC with millisecond precision, e.g. "2024-01-05T10:11:12.345Z".
std::string format_utc(std::chrono::system_clock::time_point tp);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace fbjudge
