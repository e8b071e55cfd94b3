// SPDX-License-Identifier: Apache-2.0
#include "latefuse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "latefuse/fusion.hpp"

namespace latefuse {

namespace fw = framework;

std::string fw::single_model(std::size_t index) { return "single_model_" + std::to_string(index); }

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw LengthMismatchError("rmse: " + std::to_string(pred.size()) + " predictions vs " +
                              std::to_string(truth.size()) + " truths");
  }
  if (pred.empty()) throw EmptyInputError("rmse: empty input");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(pred.size()));
}

double rmsess(std::span<const double> pred, std::span<const double> truth,
              std::span<const double> clim) {
  const double rmse_clim = rmse(clim, truth);
  if (rmse_clim == 0.0) {
    throw DegenerateClimatologyError("rmsess: climatology matches truth exactly");
  }
  return 1.0 - rmse(pred, truth) / rmse_clim;
}

double SkillReport::average_rmsess(std::string_view framework) const {
  // Mean over lead times within each channel, then mean over channels.
  std::map<std::string, std::pair<double, std::size_t>> per_channel;
  for (const SkillRow& row : rows) {
    if (row.framework != framework) continue;
    auto& [sum, count] = per_channel[row.channel];
    sum += row.rmsess;
    ++count;
  }
  if (per_channel.empty()) {
    throw std::invalid_argument("average_rmsess: no rows for framework '" +
                                std::string(framework) + "'");
  }
  double total = 0.0;
  for (const auto& [channel, acc] : per_channel) total += acc.first / static_cast<double>(acc.second);
  return total / static_cast<double>(per_channel.size());
}

const SkillRow* SkillReport::find(std::string_view channel, std::int64_t lead_time,
                                  std::string_view framework) const {
  for (const SkillRow& row : rows) {
    if (row.lead_time == lead_time && row.channel == channel && row.framework == framework) {
      return &row;
    }
  }
  return nullptr;
}

namespace {

DenseVector column(const DenseMatrix& m, std::size_t c) {
  DenseVector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, c);
  return out;
}

}  // namespace

SkillReport compare_frameworks(std::span<const FrameworkPredictions> frameworks,
                               const DenseMatrix& truth, const DenseMatrix& climatology,
                               std::span<const std::string> channels, std::int64_t lead_time) {
  if (climatology.rows() != truth.rows() || climatology.cols() != truth.cols()) {
    throw MisalignedSamplesError("compare_frameworks: climatology shape mismatch");
  }
  if (channels.size() != truth.cols()) {
    throw MisalignedSamplesError("compare_frameworks: channel list does not match truth columns");
  }
  for (const auto& f : frameworks) {
    if (f.predictions.rows() != truth.rows() || f.predictions.cols() != truth.cols()) {
      throw MisalignedSamplesError("compare_frameworks: framework '" + f.name +
                                   "' shape mismatch");
    }
  }

  SkillReport report;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const DenseVector truth_col = column(truth, c);
    const DenseVector clim_col = column(climatology, c);
    const double rmse_clim = rmse(clim_col, truth_col);
    for (const auto& f : frameworks) {
      const DenseVector pred_col = column(f.predictions, c);
      SkillRow row;
      row.channel = channels[c];
      row.lead_time = lead_time;
      row.framework = f.name;
      row.rmse_model = rmse(pred_col, truth_col);
      row.rmse_clim = rmse_clim;
      row.rmsess = rmsess(pred_col, truth_col, clim_col);
      report.rows.push_back(std::move(row));
    }
    SkillRow clim_row;
    clim_row.channel = channels[c];
    clim_row.lead_time = lead_time;
    clim_row.framework = framework::climatology;
    clim_row.rmse_model = rmse_clim;
    clim_row.rmse_clim = rmse_clim;
    clim_row.rmsess = rmsess(clim_col, truth_col, clim_col);  // exactly 0
    report.rows.push_back(std::move(clim_row));
  }
  return report;
}

std::vector<SweepPoint> ensemble_size_sweep(std::span<const EnsembleLeadData> leads,
                                            std::span<const std::size_t> sizes,
                                            double ridge_epsilon) {
  if (leads.empty()) throw std::invalid_argument("ensemble_size_sweep: no lead times");
  std::size_t pool = leads[0].val_predictions.size();
  for (const auto& lead : leads) {
    pool = std::min({pool, lead.val_predictions.size(), lead.test_predictions.size()});
  }
  for (std::size_t size : sizes) {
    if (size == 0) throw std::invalid_argument("ensemble_size_sweep: size must be >= 1");
    if (size > pool) {
      throw PoolTooSmallError("ensemble_size_sweep: size " + std::to_string(size) +
                              " exceeds pool of " + std::to_string(pool));
    }
  }

  std::vector<SweepPoint> out;
  out.reserve(sizes.size());
  for (std::size_t size : sizes) {
    SweepPoint point;
    point.size = size;
    // rmsess indexed [channel][lead], averaged lead-first per the report
    // convention. Channels are assumed consistent across leads.
    const std::size_t n_channels = leads[0].channels.size();
    std::vector<double> fusion_sum(n_channels, 0.0), best_sum(n_channels, 0.0);

    for (const EnsembleLeadData& lead : leads) {
      // Fusion weights per channel from the validation subset of the pool.
      std::vector<EnsemblePredictions> val_ensembles;
      val_ensembles.reserve(n_channels);
      for (std::size_t c = 0; c < n_channels; ++c) {
        EnsemblePredictions ens;
        ens.channel = lead.channels[c];
        ens.predictions = DenseMatrix(size, lead.val_targets.rows());
        for (std::size_t j = 0; j < size; ++j) {
          for (std::size_t i = 0; i < lead.val_targets.rows(); ++i) {
            ens.predictions(j, i) = lead.val_predictions[j](i, c);
          }
        }
        val_ensembles.push_back(std::move(ens));
      }
      const auto weights = fuse_per_channel(val_ensembles, lead.val_targets, ridge_epsilon);

      const std::size_t best =
          best_model_select(std::span(lead.val_predictions.data(), size), lead.val_targets);

      for (std::size_t c = 0; c < n_channels; ++c) {
        const std::size_t n_test = lead.test_targets.rows();
        EnsemblePredictions test_ens;
        test_ens.channel = lead.channels[c];
        test_ens.predictions = DenseMatrix(size, n_test);
        for (std::size_t j = 0; j < size; ++j) {
          for (std::size_t i = 0; i < n_test; ++i) {
            test_ens.predictions(j, i) = lead.test_predictions[j](i, c);
          }
        }
        const DenseVector fused = fuse(test_ens, weights[c]);
        const DenseVector truth_col = column(lead.test_targets, c);
        const DenseVector clim_col = column(lead.test_climatology, c);
        fusion_sum[c] += rmsess(fused, truth_col, clim_col);
        best_sum[c] += rmsess(column(lead.test_predictions[best], c), truth_col, clim_col);
      }
    }

    double fusion_avg = 0.0, best_avg = 0.0;
    for (std::size_t c = 0; c < n_channels; ++c) {
      fusion_avg += fusion_sum[c] / static_cast<double>(leads.size());
      best_avg += best_sum[c] / static_cast<double>(leads.size());
    }
    point.late_fusion_rmsess = fusion_avg / static_cast<double>(n_channels);
    point.best_model_rmsess = best_avg / static_cast<double>(n_channels);
    out.push_back(point);
  }
  return out;
}

}  // namespace latefuse
