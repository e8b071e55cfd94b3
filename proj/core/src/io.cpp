// SPDX-License-Identifier: Apache-2.0
#include "latefuse/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "latefuse/errors.hpp"

namespace latefuse {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return content;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string() + ": " +
                        ec.message());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& what) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw DataFormatError(what + ": not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw DataFormatError(what + ": non-finite value: '" + std::string(token) + "'");
  }
  return value;
}

std::int64_t parse_int64(std::string_view token, const std::string& what) {
  std::int64_t value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw DataFormatError(what + ": not an integer: '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace latefuse
