// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latefuse/numerics.hpp"

namespace latefuse {

/// Root mean square error. Throws LengthMismatchError / EmptyInputError.
double rmse(std::span<const double> pred, std::span<const double> truth);

/// RMSE skill score 1 - rmse(pred)/rmse(clim); 1 is perfect, 0 matches the
/// climatology baseline, negative is worse than it.
/// Throws DegenerateClimatologyError when rmse(clim, truth) is zero.
double rmsess(std::span<const double> pred, std::span<const double> truth,
              std::span<const double> clim);

struct SkillRow {
  std::string channel;
  std::int64_t lead_time = 0;
  std::string framework;
  double rmse_model = 0.0;
  double rmse_clim = 0.0;
  double rmsess = 0.0;
};

struct SkillReport {
  std::vector<SkillRow> rows;

  /// Mean RMSESS for one framework: averaged over lead times first, then
  /// over channels.
  double average_rmsess(std::string_view framework) const;

  const SkillRow* find(std::string_view channel, std::int64_t lead_time,
                       std::string_view framework) const;
};

/// Canonical framework labels used in reports.
namespace framework {
inline constexpr const char* late_fusion = "late_fusion";
inline constexpr const char* best_model = "best_model";
inline constexpr const char* climatology = "climatology";
std::string single_model(std::size_t index);
}  // namespace framework

struct FrameworkPredictions {
  std::string name;
  DenseMatrix predictions;  // N x C
};

/// One SkillRow per (channel, framework), all using the given lead-time
/// label; a climatology row (RMSESS exactly 0) is appended per channel.
/// Throws MisalignedSamplesError on any shape mismatch.
SkillReport compare_frameworks(std::span<const FrameworkPredictions> frameworks,
                               const DenseMatrix& truth, const DenseMatrix& climatology,
                               std::span<const std::string> channels, std::int64_t lead_time);

/// Everything the size sweep needs for one lead time.
struct EnsembleLeadData {
  std::int64_t lead_time = 0;
  std::vector<DenseMatrix> val_predictions;   // per model, N_val x C
  std::vector<DenseMatrix> test_predictions;  // per model, N_test x C
  DenseMatrix val_targets;
  DenseMatrix test_targets;
  DenseMatrix test_climatology;
  std::vector<std::string> channels;
};

struct SweepPoint {
  std::size_t size = 0;
  double late_fusion_rmsess = 0.0;
  double best_model_rmsess = 0.0;
};

/// For each ensemble size k: fuse / select with the first k models of the
/// pool (fixed order), evaluate on test, and average RMSESS over lead times
/// then channels. Deterministic given the pool order.
/// Throws PoolTooSmallError when any requested size exceeds the pool.
std::vector<SweepPoint> ensemble_size_sweep(std::span<const EnsembleLeadData> leads,
                                            std::span<const std::size_t> sizes,
                                            double ridge_epsilon = 1e-8);

}  // namespace latefuse
