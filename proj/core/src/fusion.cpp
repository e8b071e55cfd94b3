// SPDX-License-Identifier: Apache-2.0
#include "latefuse/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace latefuse {

ErrorMatrix error_correlation(const EnsemblePredictions& preds, std::span<const double> targets) {
  const std::size_t k = preds.models();
  const std::size_t n = preds.samples();
  if (targets.size() != n) {
    throw LengthMismatchError("error_correlation: " + std::to_string(targets.size()) +
                              " targets for " + std::to_string(n) + " samples");
  }
  if (k == 0) throw std::invalid_argument("error_correlation: no models");

  // Error vectors e_j = f_j - t, then the Gram matrix. Computing the upper
  // triangle and mirroring keeps M exactly symmetric.
  DenseMatrix errors(k, n);
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = preds.predictions.row(j);
    auto dst = errors.row(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = row[i] - targets[i];
  }

  ErrorMatrix out;
  out.sample_count = n;
  out.m = DenseMatrix(k, k);
  for (std::size_t j1 = 0; j1 < k; ++j1) {
    for (std::size_t j2 = j1; j2 < k; ++j2) {
      const double v = dot(errors.row(j1), errors.row(j2));
      out.m(j1, j2) = v;
      out.m(j2, j1) = v;
    }
  }
  return out;
}

FusionWeights solve_weights(const ErrorMatrix& m, double ridge_epsilon) {
  const std::size_t k = m.m.rows();
  if (k == 0 || m.m.cols() != k) {
    throw std::invalid_argument("solve_weights: matrix must be square and nonempty");
  }

  if (max_abs(m.m) == 0.0) {
    // All models perfect on the fitting set; any sum-one w is optimal.
    return FusionWeights{DenseVector(k, 1.0 / static_cast<double>(k)), 0.0};
  }

  double trace = 0.0;
  for (std::size_t j = 0; j < k; ++j) trace += m.m(j, j);

  const DenseVector ones(k, 1.0);
  double lambda = 0.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    DenseMatrix a = m.m;
    for (std::size_t j = 0; j < k; ++j) a(j, j) += lambda;
    bool solved = false;
    DenseVector y;
    try {
      y = solve_linear(a, ones);
      solved = true;
    } catch (const SingularMatrixError&) {
    }
    if (solved) {
      double sum = 0.0;
      for (double v : y) sum += v;
      if (std::abs(sum) >= 1e-12 && std::isfinite(sum)) {
        FusionWeights w;
        w.ridge_used = lambda;
        w.weights.resize(k);
        bool finite = true;
        for (std::size_t j = 0; j < k; ++j) {
          w.weights[j] = y[j] / sum;
          finite = finite && std::isfinite(w.weights[j]);
        }
        if (finite) return w;
      }
    }
    lambda = (attempt == 0) ? ridge_epsilon * trace / static_cast<double>(k) : lambda * 10.0;
  }
  throw UnsolvableWeightsError("solve_weights: system unsolvable after ridge escalation (K=" +
                               std::to_string(k) + ")");
}

DenseVector fuse(const EnsemblePredictions& preds, const FusionWeights& weights) {
  const std::size_t k = preds.models();
  const std::size_t n = preds.samples();
  if (weights.weights.size() != k) {
    throw LengthMismatchError("fuse: " + std::to_string(weights.weights.size()) +
                              " weights for " + std::to_string(k) + " models");
  }
  DenseVector out(n, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double w = weights.weights[j];
    const auto row = preds.predictions.row(j);
    for (std::size_t i = 0; i < n; ++i) out[i] += w * row[i];
  }
  return out;
}

std::vector<FusionWeights> fuse_per_channel(std::span<const EnsemblePredictions> ensembles,
                                            const DenseMatrix& targets, double ridge_epsilon) {
  if (targets.cols() != ensembles.size()) {
    throw LengthMismatchError("fuse_per_channel: " + std::to_string(ensembles.size()) +
                              " channels but " + std::to_string(targets.cols()) +
                              " target columns");
  }
  std::vector<FusionWeights> out;
  out.reserve(ensembles.size());
  const std::size_t k = ensembles.empty() ? 0 : ensembles[0].models();
  for (std::size_t c = 0; c < ensembles.size(); ++c) {
    const auto& ens = ensembles[c];
    if (ens.models() != k) {
      throw LengthMismatchError("fuse_per_channel: channel '" + ens.channel +
                                "': inconsistent model count");
    }
    DenseVector channel_targets(targets.rows());
    for (std::size_t i = 0; i < targets.rows(); ++i) channel_targets[i] = targets(i, c);
    try {
      out.push_back(solve_weights(error_correlation(ens, channel_targets), ridge_epsilon));
    } catch (const Error& e) {
      throw Error(e.kind(), "channel '" + ens.channel + "': " + e.what());
    }
  }
  return out;
}

std::size_t best_model_select(std::span<const DenseMatrix> model_predictions,
                              const DenseMatrix& targets) {
  if (model_predictions.empty()) {
    throw std::invalid_argument("best_model_select: empty model pool");
  }
  std::size_t best = 0;
  double best_sse = 0.0;
  for (std::size_t j = 0; j < model_predictions.size(); ++j) {
    const DenseMatrix& preds = model_predictions[j];
    if (preds.rows() != targets.rows() || preds.cols() != targets.cols()) {
      throw LengthMismatchError("best_model_select: model " + std::to_string(j) +
                                " prediction shape mismatch");
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < preds.entries().size(); ++i) {
      const double e = preds.entries()[i] - targets.entries()[i];
      sse += e * e;
    }
    if (j == 0 || sse < best_sse) {
      best = j;
      best_sse = sse;
    }
  }
  return best;
}

double expected_sq_error(const ErrorMatrix& m, const FusionWeights& weights) {
  if (weights.weights.size() != m.m.rows()) {
    throw LengthMismatchError("expected_sq_error: weights length mismatch");
  }
  const DenseVector mw = matvec(m.m, weights.weights);
  return dot(weights.weights, mw);
}

FusionWeights clip_renormalize(const FusionWeights& weights) {
  FusionWeights out = weights;
  double sum = 0.0;
  for (double& w : out.weights) {
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  if (sum <= 0.0) {
    const double uniform = 1.0 / static_cast<double>(out.weights.size());
    for (double& w : out.weights) w = uniform;
    return out;
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

}  // namespace latefuse
