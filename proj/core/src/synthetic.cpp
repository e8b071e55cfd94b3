// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "latefuse/dataset.hpp"
#include "latefuse/rng.hpp"

namespace latefuse {

TimeSeries synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.length < 1) {
    throw InvalidConfigError("synth: length must be positive, got " + std::to_string(cfg.length));
  }
  if (cfg.channels.empty()) throw InvalidConfigError("synth: at least one channel required");
  for (const auto& ch : cfg.channels) {
    if (ch.name.empty()) throw InvalidConfigError("synth: channel name must be non-empty");
    if (ch.noise_std < 0.0) {
      throw InvalidConfigError("synth: negative noise std for channel '" + ch.name + "'");
    }
    for (const auto& s : ch.sinusoids) {
      if (!(s.period > 0.0)) {
        throw InvalidConfigError("synth: sinusoid period must be positive in channel '" + ch.name +
                                 "'");
      }
    }
  }

  TimeSeries series;
  series.step_length = StepLength{1, cfg.step_unit};
  series.start_time = cfg.start_time;
  series.channels.reserve(cfg.channels.size());
  for (const auto& ch : cfg.channels) series.channels.push_back(ch.name);
  series.values = DenseMatrix(static_cast<std::size_t>(cfg.length), cfg.channels.size());

  // Noise draws are row-major over (time, channel); channels with zero
  // noise do not consume draws.
  Rng rng(seed);

  for (std::int64_t i = 0; i < cfg.length; ++i) {
    const double t = static_cast<double>(cfg.start_time + i);
    auto row = series.values.row(static_cast<std::size_t>(i));
    for (std::size_t c = 0; c < cfg.channels.size(); ++c) {
      const auto& ch = cfg.channels[c];
      double v = ch.offset + ch.trend * t;
      for (const auto& s : ch.sinusoids) {
        v += s.amplitude * std::sin(2.0 * std::numbers::pi * t / s.period + s.phase);
      }
      if (ch.noise_std > 0.0) v += ch.noise_std * rng.next_gaussian();
      row[c] = v;
    }
  }
  return series;
}

}  // namespace latefuse
