// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "latefuse/dataset.hpp"
#include "latefuse/evaluation.hpp"
#include "latefuse/io.hpp"

using namespace latefuse;

namespace {

TimeSeries series_from(std::vector<double> values, std::int64_t start = 0) {
  TimeSeries s;
  s.start_time = start;
  s.channels = {"x"};
  s.values = DenseMatrix(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) s.values(i, 0) = values[i];
  return s;
}

}  // namespace

TEST_CASE("aggregate: factor 1 is the identity") {
  const TimeSeries s = series_from({1, 2, 3, 4, 5});
  CHECK(aggregate(s, 1) == s);
}

TEST_CASE("aggregate: pairwise means, trailing partial block dropped") {
  const TimeSeries out = aggregate(series_from({1, 2, 3, 4, 5}), 2);
  REQUIRE(out.length() == 2);
  CHECK(out.values(0, 0) == 1.5);
  CHECK(out.values(1, 0) == 3.5);
  CHECK(out.step_length.ticks == 2);
}

TEST_CASE("aggregate: constant series stays constant") {
  const TimeSeries out = aggregate(series_from({7, 7, 7, 7, 7, 7}), 3);
  for (std::size_t i = 0; i < out.length(); ++i) CHECK(out.values(i, 0) == 7.0);
}

TEST_CASE("aggregate: composes when lengths divide exactly") {
  std::vector<double> vals(24);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::sin(0.3 * double(i)) * 10.0;
  const TimeSeries s = series_from(vals);
  const TimeSeries two_step = aggregate(aggregate(s, 2), 3);
  const TimeSeries one_step = aggregate(s, 6);
  REQUIRE(two_step.length() == one_step.length());
  CHECK(two_step.start_time == one_step.start_time);
  for (std::size_t i = 0; i < one_step.length(); ++i) {
    CHECK(two_step.values(i, 0) == doctest::Approx(one_step.values(i, 0)).epsilon(1e-12));
  }
}

TEST_CASE("aggregate: series shorter than factor") {
  CHECK_THROWS_AS(aggregate(series_from({1, 2}), 3), EmptyResultError);
}

TEST_CASE("make_windows: hand-enumerated first sample") {
  const TimeSeries s = series_from({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const WindowedSamples w = make_windows(s, 2, 1);
  REQUIRE(w.size() == 8);
  CHECK(w.inputs(0, 0) == 1.0);
  CHECK(w.inputs(0, 1) == 2.0);
  CHECK(w.targets(0, 0) == 3.0);
  CHECK(w.sample_times[0] == 2);
  CHECK(w.inputs(7, 0) == 8.0);
  CHECK(w.targets(7, 0) == 10.0);
}

TEST_CASE("make_windows: degenerate one-step-ahead pairs") {
  const TimeSeries s = series_from({1, 2, 3, 4});
  const WindowedSamples w = make_windows(s, 1, 1);
  REQUIRE(w.size() == 3);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w.inputs(i, 0) == s.values(i, 0));
    CHECK(w.targets(i, 0) == s.values(i + 1, 0));
  }
}

TEST_CASE("make_windows: insufficient data") {
  const TimeSeries s = series_from(std::vector<double>(10, 1.0));
  CHECK_THROWS_AS(make_windows(s, 6, 5), InsufficientDataError);
}

TEST_CASE("make_windows: target alignment matches index arithmetic") {
  TimeSeries s;
  s.start_time = 100;
  s.channels = {"a", "b"};
  s.values = DenseMatrix(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    s.values(i, 0) = double(i);
    s.values(i, 1) = 1000.0 + double(i);
  }
  const std::int64_t horizon = 6, lead = 4;
  const WindowedSamples w = make_windows(s, horizon, lead);
  REQUIRE(w.size() == 40 - horizon - lead + 1);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t target_row = i + horizon - 1 + lead;
    CHECK(w.targets(i, 0) == s.values(target_row, 0));
    CHECK(w.targets(i, 1) == s.values(target_row, 1));
    CHECK(w.sample_times[i] == s.time_at(target_row));
    // Stacking is time-major: step s then channel c.
    for (std::int64_t step = 0; step < horizon; ++step) {
      CHECK(w.inputs(i, std::size_t(step) * 2 + 0) == s.values(i + std::size_t(step), 0));
      CHECK(w.inputs(i, std::size_t(step) * 2 + 1) == s.values(i + std::size_t(step), 1));
    }
  }
}

TEST_CASE("make_windows: channel selection by name") {
  TimeSeries s;
  s.channels = {"a", "b"};
  s.values = DenseMatrix(10, 2);
  for (std::size_t i = 0; i < 10; ++i) {
    s.values(i, 0) = double(i);
    s.values(i, 1) = -double(i);
  }
  const std::vector<std::string> in{"b"}, out{"a"};
  const WindowedSamples w = make_windows(s, 2, 1, in, out);
  CHECK(w.inputs.cols() == 2);
  CHECK(w.targets.cols() == 1);
  CHECK(w.inputs(0, 0) == -0.0);
  CHECK(w.inputs(0, 1) == -1.0);
  CHECK(w.targets(0, 0) == 2.0);
  CHECK_THROWS_AS(make_windows(s, 2, 1, std::vector<std::string>{"zz"}, {}),
                  std::invalid_argument);
}

namespace {

WindowedSamples uniform_windows(std::size_t n) {
  TimeSeries s = series_from(std::vector<double>(n + 2, 1.0));
  return make_windows(s, 1, 2);  // target times 2 .. n+1
}

}  // namespace

TEST_CASE("split: empty partition is an error") {
  const WindowedSamples w = uniform_windows(30);
  SplitSpec all_train;
  all_train.train = {0, 100};
  all_train.val = {100, 100};
  all_train.test = {100, 100};
  CHECK_THROWS_AS(split(w, all_train), EmptySplitError);
}

TEST_CASE("split: contiguous thirds give equal partitions") {
  const WindowedSamples w = uniform_windows(30);  // target times 2..31
  SplitSpec spec;
  spec.train = {2, 12};
  spec.val = {12, 22};
  spec.test = {22, 32};
  const SplitResult r = split(w, spec);
  CHECK(r.train.size() == 10);
  CHECK(r.val.size() == 10);
  CHECK(r.test.size() == 10);
}

TEST_CASE("split: boundary sample goes to the later interval (closed-open)") {
  const WindowedSamples w = uniform_windows(30);
  SplitSpec spec;
  spec.train = {2, 12};
  spec.val = {12, 22};
  spec.test = {22, 32};
  const SplitResult r = split(w, spec);
  CHECK(r.val.sample_times.front() == 12);
  CHECK(r.train.sample_times.back() == 11);
  CHECK(r.test.sample_times.front() == 22);
}

TEST_CASE("split: partitions are disjoint and union with drops equals input") {
  const WindowedSamples w = uniform_windows(40);  // target times 2..41
  SplitSpec spec;
  spec.train = {4, 14};
  spec.val = {20, 28};
  spec.test = {30, 38};
  const SplitResult r = split(w, spec);
  std::vector<std::int64_t> seen;
  for (const auto& part : {r.train, r.val, r.test}) {
    for (std::int64_t t : part.sample_times) seen.push_back(t);
  }
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());  // disjoint
  std::size_t dropped = 0;
  for (std::int64_t t : w.sample_times) {
    const bool in_any = spec.train.contains(t) || spec.val.contains(t) || spec.test.contains(t);
    if (!in_any) ++dropped;
  }
  CHECK(seen.size() + dropped == w.size());
  // Order preserved inside each partition.
  CHECK(std::is_sorted(r.train.sample_times.begin(), r.train.sample_times.end()));
}

TEST_CASE("split: misordered spec is rejected") {
  const WindowedSamples w = uniform_windows(30);
  SplitSpec spec;
  spec.train = {10, 20};
  spec.val = {5, 15};
  spec.test = {20, 30};
  CHECK_THROWS_AS(split(w, spec), InvalidConfigError);
}

TEST_CASE("climate_normal: exact on a periodic series") {
  std::vector<double> vals;
  for (int cycle = 0; cycle < 5; ++cycle) {
    for (int p = 0; p < 4; ++p) vals.push_back(10.0 * p);
  }
  const TimeSeries s = series_from(vals);
  const std::vector<std::int64_t> queries{16, 17, 18, 19};
  const DenseMatrix normals = climate_normal(s, {30, 4}, queries);
  DenseVector truth(4), got(4);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    truth[q] = s.values(std::size_t(queries[q]), 0);
    got[q] = normals(q, 0);
    CHECK(normals(q, 0) == truth[q]);
  }
  CHECK(rmse(got, truth) == 0.0);
}

TEST_CASE("climate_normal: mean of available same-phase history") {
  // Phase-0 values 10 then 14 in the two prior cycles.
  const TimeSeries s = series_from({10, 0, 0, 14, 0, 0});
  const DenseMatrix normals = climate_normal(s, {30, 3}, std::vector<std::int64_t>{6});
  CHECK(normals(0, 0) == 12.0);
}

TEST_CASE("climate_normal: window of one year is the previous cycle") {
  const TimeSeries s = series_from({10, 0, 0, 14, 0, 0});
  const DenseMatrix normals = climate_normal(s, {1, 3}, std::vector<std::int64_t>{6});
  CHECK(normals(0, 0) == 14.0);
}

TEST_CASE("climate_normal: no history") {
  const TimeSeries s = series_from({1, 2, 3, 4});
  CHECK_THROWS_AS(climate_normal(s, {30, 4}, std::vector<std::int64_t>{3}), NoHistoryError);
}

TEST_CASE("synth_generate: noiseless sinusoid is periodic") {
  SynthConfig cfg;
  cfg.length = 40;
  SynthChannel ch;
  ch.name = "x";
  ch.offset = 3.0;
  ch.sinusoids = {{2.0, 10.0, 0.5}};
  cfg.channels = {ch};
  const TimeSeries s = synth_generate(cfg, 1);
  for (std::size_t i = 0; i + 10 < s.length(); ++i) {
    CHECK(s.values(i, 0) == doctest::Approx(s.values(i + 10, 0)).epsilon(1e-9));
  }
}

TEST_CASE("synth_generate: deterministic per seed") {
  SynthConfig cfg;
  cfg.length = 64;
  SynthChannel ch;
  ch.name = "x";
  ch.noise_std = 1.5;
  ch.sinusoids = {{1.0, 7.0, 0.0}};
  cfg.channels = {ch};
  CHECK(synth_generate(cfg, 42) == synth_generate(cfg, 42));
  CHECK(synth_generate(cfg, 42) != synth_generate(cfg, 43));
}

TEST_CASE("synth_generate: trend accumulates over one period") {
  SynthConfig cfg;
  cfg.length = 30;
  SynthChannel ch;
  ch.name = "x";
  ch.trend = 0.25;
  ch.sinusoids = {{3.0, 10.0, 1.0}};
  cfg.channels = {ch};
  const TimeSeries s = synth_generate(cfg, 5);
  for (std::size_t i = 10; i < s.length(); ++i) {
    CHECK(s.values(i, 0) - s.values(i - 10, 0) == doctest::Approx(0.25 * 10.0).epsilon(1e-9));
  }
}

TEST_CASE("synth_generate: invalid configs") {
  SynthConfig cfg;
  cfg.length = 0;
  cfg.channels = {SynthChannel{"x", 0, 0, {}, 0}};
  CHECK_THROWS_AS(synth_generate(cfg, 1), InvalidConfigError);
  cfg.length = 10;
  cfg.channels[0].noise_std = -1.0;
  CHECK_THROWS_AS(synth_generate(cfg, 1), InvalidConfigError);
  cfg.channels[0].noise_std = 0.0;
  cfg.channels[0].sinusoids = {{1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(synth_generate(cfg, 1), InvalidConfigError);
  cfg.channels.clear();
  CHECK_THROWS_AS(synth_generate(cfg, 1), InvalidConfigError);
}

TEST_CASE("csv: write/read round trip is exact") {
  SynthConfig cfg;
  cfg.length = 33;
  cfg.start_time = -5;
  SynthChannel a{"temp a", 10.0, 0.01, {{2.0, 9.0, 0.3}}, 0.7};
  SynthChannel b{"temp_b", -4.0, 0.0, {{1.0, 5.0, 1.1}}, 0.2};
  cfg.channels = {a, b};
  const TimeSeries s = synth_generate(cfg, 11);

  const auto path = std::filesystem::temp_directory_path() / "latefuse_csv_roundtrip.csv";
  write_timeseries_csv(s, path);
  TimeSeries back = read_timeseries_csv(path);
  back.step_length = s.step_length;  // the CSV dialect does not carry units
  CHECK(back == s);
  std::filesystem::remove(path);
}

TEST_CASE("csv: dialect violations") {
  CHECK_THROWS_AS(parse_timeseries_csv("", "t"), DataFormatError);
  CHECK_THROWS_AS(parse_timeseries_csv("when,x\n0,1\n", "t"), DataFormatError);
  CHECK_THROWS_AS(parse_timeseries_csv("time\n0\n", "t"), DataFormatError);
  CHECK_THROWS_AS(parse_timeseries_csv("time,x\n0,1\n1\n", "t"), DataFormatError);        // ragged
  CHECK_THROWS_AS(parse_timeseries_csv("time,x\n0,1\n2,2\n", "t"), DataFormatError);      // gap
  CHECK_THROWS_AS(parse_timeseries_csv("time,x\n0,nan\n", "t"), DataFormatError);         // nan
  CHECK_THROWS_AS(parse_timeseries_csv("time,x\n0,inf\n", "t"), DataFormatError);         // inf
  CHECK_THROWS_AS(parse_timeseries_csv("time,x\n0,abc\n", "t"), DataFormatError);         // text
  CHECK_THROWS_AS(parse_timeseries_csv("time,x\n0.5,1\n", "t"), DataFormatError);         // time
  CHECK_THROWS_AS(read_timeseries_csv("/nonexistent/latefuse.csv"), IoError);
}

TEST_CASE("csv: crlf and trailing newline tolerated") {
  const TimeSeries s = parse_timeseries_csv("time,x\r\n0,1.5\r\n1,2.5\r\n\n", "t");
  REQUIRE(s.length() == 2);
  CHECK(s.values(1, 0) == 2.5);
}
