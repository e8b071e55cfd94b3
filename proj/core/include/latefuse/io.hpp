// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace latefuse {

/// Reads a whole file. Throws IoError on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes content to a temporary sibling file and renames it into place, so
/// a partial run never leaves a truncated file behind.
/// Throws IoError on failure.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict full-token parsers. Throw DataFormatError mentioning `what` on any
/// trailing garbage, overflow, or (for doubles) non-finite result.
double parse_double(std::string_view token, const std::string& what);
std::int64_t parse_int64(std::string_view token, const std::string& what);

}  // namespace latefuse
