// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <string_view>
#include <vector>

#include "latefuse/dataset.hpp"
#include "latefuse/io.hpp"

namespace latefuse {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

TimeSeries parse_timeseries_csv(std::string_view text, const std::string& origin) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(strip_cr(text.substr(start, nl - start)));
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataFormatError(origin + ": empty file");

  const auto header = split_fields(lines[0]);
  if (header.empty() || header[0] != "time") {
    throw DataFormatError(origin + ": header must start with 'time'");
  }
  if (header.size() < 2) throw DataFormatError(origin + ": no channel columns");

  TimeSeries series;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) throw DataFormatError(origin + ": empty channel name in header");
    series.channels.emplace_back(header[i]);
  }

  const std::size_t n_rows = lines.size() - 1;
  const std::size_t n_cols = series.channels.size();
  series.values = DenseMatrix(n_rows, n_cols);

  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::string where = origin + ": row " + std::to_string(r + 2);
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != header.size()) {
      throw DataFormatError(where + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    }
    const std::int64_t t = parse_int64(fields[0], where + " time");
    if (r == 0) {
      series.start_time = t;
    } else if (t != series.start_time + static_cast<std::int64_t>(r)) {
      throw DataFormatError(where + ": timestamps must be contiguous ascending integers");
    }
    auto row = series.values.row(r);
    for (std::size_t c = 0; c < n_cols; ++c) {
      row[c] = parse_double(fields[c + 1], where + " channel '" + series.channels[c] + "'");
    }
  }
  return series;
}

std::string format_timeseries_csv(const TimeSeries& series) {
  std::string out = "time";
  for (const auto& ch : series.channels) {
    out += ',';
    out += ch;
  }
  out += '\n';
  for (std::size_t r = 0; r < series.length(); ++r) {
    out += std::to_string(series.time_at(r));
    for (double v : series.values.row(r)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  return parse_timeseries_csv(read_file(path), path.string());
}

void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path) {
  atomic_write_file(path, format_timeseries_csv(series));
}

}  // namespace latefuse
