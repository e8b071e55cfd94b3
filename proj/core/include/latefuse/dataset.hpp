// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latefuse/numerics.hpp"

namespace latefuse {

/// Length of one time step, as a multiple of an abstract base unit.
/// Aggregation scales `ticks`; the unit label is informational only.
struct StepLength {
  std::int64_t ticks = 1;
  std::string unit = "step";

  bool operator==(const StepLength&) const = default;
};

/// Multi-channel record sampled on contiguous integer time steps. Row i of
/// `values` holds all channels at timestamp start_time + i, so the
/// strictly-increasing-and-contiguous timestamp invariant holds by
/// construction.
struct TimeSeries {
  StepLength step_length;
  std::int64_t start_time = 0;
  std::vector<std::string> channels;
  DenseMatrix values;  // time x channel

  std::size_t length() const noexcept { return values.rows(); }
  std::int64_t time_at(std::size_t row) const noexcept {
    return start_time + static_cast<std::int64_t>(row);
  }
  std::optional<std::size_t> channel_index(std::string_view name) const;

  bool operator==(const TimeSeries&) const = default;
};

/// Supervised pairs. Sample i stacks the input channels over `horizon`
/// consecutive steps (time-major: step 0 channels, step 1 channels, ...) and
/// pairs them with the output channels `lead_time` steps after the window
/// end. sample_times holds the target timestamps.
struct WindowedSamples {
  DenseMatrix inputs;   // N x (horizon * n_input_channels)
  DenseMatrix targets;  // N x n_output_channels
  std::int64_t horizon = 1;
  std::int64_t lead_time = 1;
  std::vector<std::int64_t> sample_times;
  std::vector<std::string> input_channels;
  std::vector<std::string> output_channels;

  std::size_t size() const noexcept { return targets.rows(); }

  bool operator==(const WindowedSamples&) const = default;
};

/// Closed-open timestamp interval [begin, end).
struct Interval {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const noexcept { return t >= begin && t < end; }
  bool operator==(const Interval&) const = default;
};

/// Ordered, disjoint partition ranges. Samples are assigned by their target
/// timestamp: skill is assessed at forecast validity time.
struct SplitSpec {
  Interval train;
  Interval val;
  Interval test;

  bool operator==(const SplitSpec&) const = default;
};

struct SplitResult {
  WindowedSamples train;
  WindowedSamples val;
  WindowedSamples test;
};

struct ClimateNormalConfig {
  std::int64_t window_years = 30;   // same-phase cycles averaged
  std::int64_t period_length = 52;  // steps per cycle

  bool operator==(const ClimateNormalConfig&) const = default;
};

struct SynthSinusoid {
  double amplitude = 0.0;
  double period = 1.0;
  double phase = 0.0;

  bool operator==(const SynthSinusoid&) const = default;
};

struct SynthChannel {
  std::string name;
  double offset = 0.0;
  double trend = 0.0;  // slope per step
  std::vector<SynthSinusoid> sinusoids;
  double noise_std = 0.0;

  bool operator==(const SynthChannel&) const = default;
};

struct SynthConfig {
  std::int64_t length = 0;
  std::vector<SynthChannel> channels;
  std::string step_unit = "step";
  std::int64_t start_time = 0;

  bool operator==(const SynthConfig&) const = default;
};

/// Mean-pools `factor` consecutive steps into one coarse step; a trailing
/// partial block is dropped. The coarse start time is floor(start / factor)
/// and step_length.ticks is multiplied by factor.
/// Throws EmptyResultError when the series is shorter than `factor`.
TimeSeries aggregate(const TimeSeries& series, std::int64_t factor);

/// Builds windowed supervised pairs. Empty channel lists select all
/// channels. N = length - horizon - lead_time + 1.
/// Throws InsufficientDataError when the series is too short.
WindowedSamples make_windows(const TimeSeries& series, std::int64_t horizon,
                             std::int64_t lead_time,
                             std::span<const std::string> input_channels = {},
                             std::span<const std::string> output_channels = {});

/// Assigns samples to train/val/test by target timestamp; samples outside
/// all intervals are dropped, input order is preserved.
/// Throws EmptySplitError when any partition receives zero samples.
SplitResult split(const WindowedSamples& samples, const SplitSpec& spec);

/// Climate-normal forecast: for each query time and channel, the mean of the
/// values at the up-to window_years most recent steps strictly before the
/// query with the same phase (time mod period_length). Returns a
/// query-by-channel matrix.
/// Throws NoHistoryError when a query has no same-phase predecessor.
DenseMatrix climate_normal(const TimeSeries& series, const ClimateNormalConfig& cfg,
                           std::span<const std::int64_t> query_times);

/// Deterministic synthetic series: per channel
///   offset + trend * t + sum_k amplitude_k * sin(2 pi t / period_k + phase_k)
/// plus Gaussian noise with the configured standard deviation.
/// Throws InvalidConfigError for non-positive length, empty channel list,
/// negative noise std, or non-positive sinusoid period.
TimeSeries synth_generate(const SynthConfig& cfg, std::uint64_t seed);

/// Reads the `time,<channel>,...` CSV dialect. Timestamps must be contiguous
/// integers; values must be finite; rows must not be ragged.
/// Throws IoError when the file cannot be read and DataFormatError on any
/// dialect violation.
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

/// Writes the same dialect with round-trip-exact decimal values.
void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path);

/// In-memory forms of the CSV codec, used by the file functions.
TimeSeries parse_timeseries_csv(std::string_view text, const std::string& origin);
std::string format_timeseries_csv(const TimeSeries& series);

}  // namespace latefuse
