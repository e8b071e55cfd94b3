// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "latefuse/dataset.hpp"
#include "latefuse/numerics.hpp"

namespace latefuse {

enum class Activation { Relu, Tanh, Identity };

std::string to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Fully connected regressor shape and its initialization seed.
struct RegressorSpec {
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::vector<std::size_t> hidden_layers;
  Activation activation = Activation::Relu;
  std::uint64_t seed = 0;

  bool operator==(const RegressorSpec&) const = default;
};

struct Layer {
  DenseMatrix weights;  // output x input
  DenseVector biases;

  bool operator==(const Layer&) const = default;
};

/// One ensemble member: input standardization stats, the fully connected
/// stack, and the denormalization stats applied to the head output. The head
/// predicts in normalized units; the affine x * std + mean output layer maps
/// them back to physical units.
struct Regressor {
  RegressorSpec spec;
  NormStats input_stats;
  NormStats output_stats;
  std::vector<Layer> layers;

  bool operator==(const Regressor&) const = default;
};

struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  std::uint64_t shuffle_seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

/// x * std + mean, per channel. Throws LengthMismatchError.
DenseVector denormalize(std::span<const double> x, const NormStats& stats);

/// (x - mean) / std, per channel. Throws LengthMismatchError.
DenseVector normalize(std::span<const double> x, const NormStats& stats);

/// lr_min + 0.5 * (lr_max - lr_min) * (1 + cos(pi * step / total_steps)).
/// Throws InvalidRangeError when lr_min > lr_max.
double cosine_lr(std::size_t step, std::size_t total_steps, double lr_min, double lr_max);

/// Fresh network for a RegressorSpec: hidden layers get uniform
/// fan-in-scaled weights drawn from the seed, the head layer is zeroed so an
/// untrained model predicts exactly the output means. Stats default to
/// identity.
Regressor init_regressor(const RegressorSpec& spec);

/// Standardize input, run the stack, denormalize the head output.
/// Throws ShapeMismatchError when the input length is wrong.
DenseVector forward(const Regressor& model, std::span<const double> input);

/// forward() for every row.
DenseMatrix forward_batch(const Regressor& model, const DenseMatrix& inputs);

/// Mean absolute error of the model over a sample set.
double mean_absolute_error(const Regressor& model, const DenseMatrix& inputs,
                           const DenseMatrix& targets);

/// Trains a regressor with Adam (0.9, 0.999, 1e-8) on MAE loss over shuffled
/// mini-batches, cosine-annealed learning rate stepped per epoch.
/// Normalization stats come from the training data only. Deterministic given
/// (spec.seed, cfg.shuffle_seed).
/// Throws EmptyTrainingSetError and DivergenceDetectedError.
Regressor train(const RegressorSpec& spec, const DenseMatrix& inputs, const DenseMatrix& targets,
                const TrainConfig& cfg);
Regressor train(const RegressorSpec& spec, const WindowedSamples& data, const TrainConfig& cfg);

/// Compares analytic parameter gradients of the single-sample MAE loss
/// against central finite differences (step 1e-5). Returns
/// max over parameters of |ga - gn| / max(1, |ga| + |gn|).
/// The caller keeps the sample away from MAE kinks.
double gradient_check(const Regressor& model, std::span<const double> input,
                      std::span<const double> target);

/// Window geometry and channel names stored alongside a saved model so a
/// prediction run needs nothing but the model file and a series.
struct WindowMeta {
  std::int64_t horizon = 0;
  std::int64_t lead_time = 0;
  std::vector<std::string> input_channels;
  std::vector<std::string> output_channels;

  bool operator==(const WindowMeta&) const = default;
};

struct SavedModel {
  Regressor model;
  WindowMeta meta;

  bool operator==(const SavedModel&) const = default;
};

/// Versioned decimal-text model file; load(save(m)) is bit-exact.
void save_model(const std::filesystem::path& path, const Regressor& model,
                const WindowMeta& meta = {});
SavedModel load_model(const std::filesystem::path& path);

std::string format_model(const Regressor& model, const WindowMeta& meta);
SavedModel parse_model(std::string_view text, const std::string& origin);

}  // namespace latefuse
