// SPDX-License-Identifier: Apache-2.0
#include "latefuse/dataset.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace latefuse {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  const std::int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

std::vector<std::size_t> resolve_channels(const TimeSeries& series,
                                          std::span<const std::string> names) {
  std::vector<std::size_t> idx;
  if (names.empty()) {
    idx.resize(series.channels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(names.size());
  for (const auto& name : names) {
    const auto found = series.channel_index(name);
    if (!found) throw std::invalid_argument("make_windows: unknown channel '" + name + "'");
    idx.push_back(*found);
  }
  return idx;
}

WindowedSamples select_samples(const WindowedSamples& samples,
                               const std::vector<std::size_t>& rows) {
  WindowedSamples out;
  out.horizon = samples.horizon;
  out.lead_time = samples.lead_time;
  out.input_channels = samples.input_channels;
  out.output_channels = samples.output_channels;
  out.inputs = DenseMatrix(rows.size(), samples.inputs.cols());
  out.targets = DenseMatrix(rows.size(), samples.targets.cols());
  out.sample_times.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    std::ranges::copy(samples.inputs.row(r), out.inputs.row(i).begin());
    std::ranges::copy(samples.targets.row(r), out.targets.row(i).begin());
    out.sample_times.push_back(samples.sample_times[r]);
  }
  return out;
}

void validate_split_spec(const SplitSpec& spec) {
  const auto ordered = [](const Interval& iv) { return iv.begin <= iv.end; };
  if (!ordered(spec.train) || !ordered(spec.val) || !ordered(spec.test)) {
    throw InvalidConfigError("split: interval must satisfy begin <= end");
  }
  if (spec.train.end > spec.val.begin || spec.val.end > spec.test.begin) {
    throw InvalidConfigError("split: intervals must be ordered train < val < test without overlap");
  }
}

}  // namespace

std::optional<std::size_t> TimeSeries::channel_index(std::string_view name) const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] == name) return i;
  }
  return std::nullopt;
}

TimeSeries aggregate(const TimeSeries& series, std::int64_t factor) {
  if (factor < 1) throw std::invalid_argument("aggregate: factor must be >= 1");
  const std::size_t blocks = series.length() / static_cast<std::size_t>(factor);
  if (blocks == 0) {
    throw EmptyResultError("aggregate: series length " + std::to_string(series.length()) +
                           " shorter than factor " + std::to_string(factor));
  }

  TimeSeries out;
  out.step_length = series.step_length;
  out.step_length.ticks *= factor;
  out.start_time = floor_div(series.start_time, factor);
  out.channels = series.channels;
  out.values = DenseMatrix(blocks, series.channels.size());
  for (std::size_t k = 0; k < blocks; ++k) {
    auto dst = out.values.row(k);
    for (std::int64_t s = 0; s < factor; ++s) {
      const auto src = series.values.row(k * static_cast<std::size_t>(factor) +
                                         static_cast<std::size_t>(s));
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
    for (double& v : dst) v /= static_cast<double>(factor);
  }
  return out;
}

WindowedSamples make_windows(const TimeSeries& series, std::int64_t horizon,
                             std::int64_t lead_time,
                             std::span<const std::string> input_channels,
                             std::span<const std::string> output_channels) {
  if (horizon < 1) throw std::invalid_argument("make_windows: horizon must be >= 1");
  if (lead_time < 1) throw std::invalid_argument("make_windows: lead_time must be >= 1");

  const auto in_idx = resolve_channels(series, input_channels);
  const auto out_idx = resolve_channels(series, output_channels);

  const std::int64_t len = static_cast<std::int64_t>(series.length());
  const std::int64_t n = len - horizon - lead_time + 1;
  if (n < 1) {
    throw InsufficientDataError("make_windows: series length " + std::to_string(len) +
                                " < horizon " + std::to_string(horizon) + " + lead_time " +
                                std::to_string(lead_time));
  }

  WindowedSamples out;
  out.horizon = horizon;
  out.lead_time = lead_time;
  for (std::size_t c : in_idx) out.input_channels.push_back(series.channels[c]);
  for (std::size_t c : out_idx) out.output_channels.push_back(series.channels[c]);
  out.inputs = DenseMatrix(static_cast<std::size_t>(n),
                           static_cast<std::size_t>(horizon) * in_idx.size());
  out.targets = DenseMatrix(static_cast<std::size_t>(n), out_idx.size());
  out.sample_times.reserve(static_cast<std::size_t>(n));

  for (std::int64_t i = 0; i < n; ++i) {
    auto input_row = out.inputs.row(static_cast<std::size_t>(i));
    std::size_t pos = 0;
    for (std::int64_t s = 0; s < horizon; ++s) {
      const auto src = series.values.row(static_cast<std::size_t>(i + s));
      for (std::size_t c : in_idx) input_row[pos++] = src[c];
    }
    const std::size_t target_row = static_cast<std::size_t>(i + horizon - 1 + lead_time);
    auto tgt = out.targets.row(static_cast<std::size_t>(i));
    const auto src = series.values.row(target_row);
    for (std::size_t c = 0; c < out_idx.size(); ++c) tgt[c] = src[out_idx[c]];
    out.sample_times.push_back(series.time_at(target_row));
  }
  return out;
}

SplitResult split(const WindowedSamples& samples, const SplitSpec& spec) {
  validate_split_spec(spec);

  std::vector<std::size_t> train_rows, val_rows, test_rows;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::int64_t t = samples.sample_times[i];
    if (spec.train.contains(t)) {
      train_rows.push_back(i);
    } else if (spec.val.contains(t)) {
      val_rows.push_back(i);
    } else if (spec.test.contains(t)) {
      test_rows.push_back(i);
    }
  }
  if (train_rows.empty()) throw EmptySplitError("split: train partition is empty");
  if (val_rows.empty()) throw EmptySplitError("split: val partition is empty");
  if (test_rows.empty()) throw EmptySplitError("split: test partition is empty");

  return SplitResult{select_samples(samples, train_rows), select_samples(samples, val_rows),
                     select_samples(samples, test_rows)};
}

DenseMatrix climate_normal(const TimeSeries& series, const ClimateNormalConfig& cfg,
                           std::span<const std::int64_t> query_times) {
  if (cfg.window_years < 1) throw std::invalid_argument("climate_normal: window_years must be >= 1");
  if (cfg.period_length < 1) {
    throw std::invalid_argument("climate_normal: period_length must be >= 1");
  }

  const std::int64_t len = static_cast<std::int64_t>(series.length());
  DenseMatrix out(query_times.size(), series.channels.size());

  for (std::size_t q = 0; q < query_times.size(); ++q) {
    const std::int64_t rel = query_times[q] - series.start_time;
    // Most recent same-phase step strictly before the query that lies in
    // the record, then walk back one period at a time.
    std::int64_t idx = rel - cfg.period_length;
    if (idx >= len) idx -= ((idx - len) / cfg.period_length + 1) * cfg.period_length;

    std::int64_t count = 0;
    auto dst = out.row(q);
    for (; idx >= 0 && count < cfg.window_years; idx -= cfg.period_length) {
      const auto src = series.values.row(static_cast<std::size_t>(idx));
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
      ++count;
    }
    if (count == 0) {
      throw NoHistoryError("climate_normal: no same-phase history before time " +
                           std::to_string(query_times[q]));
    }
    for (double& v : dst) v /= static_cast<double>(count);
  }
  return out;
}

}  // namespace latefuse
