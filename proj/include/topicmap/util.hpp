#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace topicmap {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest round-trip decimal representation; byte-stable across runs.
std::string format_double(double value);
/// Fixed-point with the given number of decimals.
std::string format_fixed(double value, int decimals);

/// Quotes a CSV field when it contains a delimiter character.
std::string csv_escape(std::string_view field);

}  // namespace topicmap
