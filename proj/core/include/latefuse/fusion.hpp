// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latefuse/numerics.hpp"

namespace latefuse {

/// Predictions of K ensemble members for N samples of one output channel.
struct EnsemblePredictions {
  std::string channel;
  DenseMatrix predictions;  // K x N

  std::size_t models() const noexcept { return predictions.rows(); }
  std::size_t samples() const noexcept { return predictions.cols(); }
};

/// K x K Gram matrix of model error vectors: M[j1,j2] = sum_i e_j1(i) e_j2(i).
/// Symmetric by construction and positive semi-definite.
struct ErrorMatrix {
  DenseMatrix m;
  std::size_t sample_count = 0;
};

/// Weights of the minimum-expected-error combination; they sum to 1 and may
/// be negative. ridge_used records the diagonal loading that was needed to
/// solve the system (0 for the plain solve).
struct FusionWeights {
  DenseVector weights;
  double ridge_used = 0.0;
};

/// Raw error-product sums over the sample set, no normalization by N.
/// Throws LengthMismatchError when targets length differs from N.
ErrorMatrix error_correlation(const EnsemblePredictions& preds, std::span<const double> targets);

/// Minimizes w^T M w subject to sum(w) = 1 via the linear solve M y = 1
/// followed by normalization. A singular or degenerate system retries with
/// ridge lambda = ridge_epsilon * trace(M) / K, escalating tenfold up to 4
/// times. An exactly zero M (all models perfect) yields uniform weights.
/// Throws UnsolvableWeightsError when every attempt fails.
FusionWeights solve_weights(const ErrorMatrix& m, double ridge_epsilon = 1e-8);

/// Weighted average of the K model predictions per sample.
/// Throws LengthMismatchError when weights length differs from K.
DenseVector fuse(const EnsemblePredictions& preds, const FusionWeights& weights);

/// error_correlation + solve_weights independently per output channel.
/// targets column c pairs with ensembles[c]. Channel-level failures are
/// rethrown with the channel name prepended.
std::vector<FusionWeights> fuse_per_channel(std::span<const EnsemblePredictions> ensembles,
                                            const DenseMatrix& targets,
                                            double ridge_epsilon = 1e-8);

/// Index of the model with the smallest RMSE over all samples and channels;
/// ties break to the lowest index.
/// Throws LengthMismatchError on shape mismatches.
std::size_t best_model_select(std::span<const DenseMatrix> model_predictions,
                              const DenseMatrix& targets);

/// w^T M w: the minimized expected squared fused error on the fitting set.
double expected_sq_error(const ErrorMatrix& m, const FusionWeights& weights);

/// Diagnostic variant that clips negative weights to zero and renormalizes.
/// Not used by the default pipeline.
FusionWeights clip_renormalize(const FusionWeights& weights);

}  // namespace latefuse
