// SPDX-License-Identifier: Apache-2.0
#include "latefuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "latefuse/rng.hpp"

namespace latefuse {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Identity:
      return x;
  }
  return x;
}

// Derivative as a function of the pre-activation. Relu uses subgradient 0 at
// the kink.
double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

// Per-sample forward state. Buffers are sized once and reused across the
// whole training run.
struct Workspace {
  std::vector<DenseVector> acts;     // acts[0] = standardized input, acts[l+1] = hidden l output
  std::vector<DenseVector> preacts;  // pre-activation of each hidden layer
  DenseVector head;                  // normalized head output
  DenseVector out;                   // denormalized prediction
  std::vector<DenseVector> deltas;   // loss gradient w.r.t. each layer's pre-activation

  explicit Workspace(const Regressor& model) {
    const std::size_t n_hidden = model.layers.size() - 1;
    acts.resize(n_hidden + 1);
    preacts.resize(n_hidden);
    deltas.resize(model.layers.size());
    acts[0].resize(model.spec.input_dim);
    for (std::size_t l = 0; l < n_hidden; ++l) {
      preacts[l].resize(model.layers[l].biases.size());
      acts[l + 1].resize(model.layers[l].biases.size());
      deltas[l].resize(model.layers[l].biases.size());
    }
    deltas[n_hidden].resize(model.spec.output_dim);
    head.resize(model.spec.output_dim);
    out.resize(model.spec.output_dim);
  }
};

void forward_into(const Regressor& model, std::span<const double> input, Workspace& ws) {
  const auto& in_stats = model.input_stats;
  for (std::size_t i = 0; i < input.size(); ++i) {
    ws.acts[0][i] = (input[i] - in_stats.means[i]) / in_stats.stds[i];
  }
  const std::size_t n_hidden = model.layers.size() - 1;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const Layer& layer = model.layers[l];
    const DenseVector& src = ws.acts[l];
    for (std::size_t o = 0; o < layer.biases.size(); ++o) {
      const double h = dot(layer.weights.row(o), src) + layer.biases[o];
      ws.preacts[l][o] = h;
      ws.acts[l + 1][o] = activate(model.spec.activation, h);
    }
  }
  const Layer& head = model.layers[n_hidden];
  const DenseVector& last = ws.acts[n_hidden];
  for (std::size_t o = 0; o < head.biases.size(); ++o) {
    const double y = dot(head.weights.row(o), last) + head.biases[o];
    ws.head[o] = y;
    ws.out[o] = y * model.output_stats.stds[o] + model.output_stats.means[o];
  }
}

struct Gradients {
  std::vector<Layer> layers;  // same shapes as the model

  explicit Gradients(const Regressor& model) {
    layers.reserve(model.layers.size());
    for (const Layer& l : model.layers) {
      layers.push_back(Layer{DenseMatrix(l.weights.rows(), l.weights.cols()),
                             DenseVector(l.biases.size(), 0.0)});
    }
  }

  void zero() {
    for (Layer& l : layers) {
      std::ranges::fill(l.weights.entries(), 0.0);
      std::ranges::fill(l.biases, 0.0);
    }
  }
};

// Accumulates gradients of `scale * sum_c |out_c - target_c|` into `grads`
// for the sample already held in `ws`. Returns sum_c |out_c - target_c|.
double backward_into(const Regressor& model, std::span<const double> target, double scale,
                     Workspace& ws, Gradients& grads) {
  const std::size_t n_hidden = model.layers.size() - 1;
  double abs_err = 0.0;

  DenseVector& head_delta = ws.deltas[n_hidden];
  for (std::size_t o = 0; o < head_delta.size(); ++o) {
    const double r = ws.out[o] - target[o];
    abs_err += std::abs(r);
    const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    // d|out - t|/d head = sign * std: the denormalization layer is affine.
    head_delta[o] = scale * sign * model.output_stats.stds[o];
  }

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const Layer& layer = model.layers[l];
    Layer& grad = grads.layers[l];
    const DenseVector& src = ws.acts[l];
    const DenseVector& delta = ws.deltas[l];
    for (std::size_t o = 0; o < delta.size(); ++o) {
      const double d = delta[o];
      if (d != 0.0) {
        auto grow = grad.weights.row(o);
        for (std::size_t i = 0; i < src.size(); ++i) grow[i] += d * src[i];
        grad.biases[o] += d;
      }
    }
    if (l > 0) {
      DenseVector& prev_delta = ws.deltas[l - 1];
      for (std::size_t i = 0; i < prev_delta.size(); ++i) {
        double s = 0.0;
        for (std::size_t o = 0; o < delta.size(); ++o) s += layer.weights(o, i) * delta[o];
        prev_delta[i] = s * activate_grad(model.spec.activation, ws.preacts[l - 1][i]);
      }
    }
  }
  return abs_err;
}

struct AdamState {
  std::vector<Layer> m;
  std::vector<Layer> v;
  std::size_t t = 0;

  explicit AdamState(const Regressor& model) {
    for (const Layer& l : model.layers) {
      m.push_back(Layer{DenseMatrix(l.weights.rows(), l.weights.cols()),
                        DenseVector(l.biases.size(), 0.0)});
      v.push_back(Layer{DenseMatrix(l.weights.rows(), l.weights.cols()),
                        DenseVector(l.biases.size(), 0.0)});
    }
  }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(Regressor& model, const Gradients& grads, AdamState& state, double lr) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto update = [&](double& param, double g, double& m, double& v) {
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g * g;
      param -= lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
    };
    auto& w = model.layers[l].weights.entries();
    const auto& gw = grads.layers[l].weights.entries();
    auto& mw = state.m[l].weights.entries();
    auto& vw = state.v[l].weights.entries();
    for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);

    auto& b = model.layers[l].biases;
    const auto& gb = grads.layers[l].biases;
    auto& mb = state.m[l].biases;
    auto& vb = state.v[l].biases;
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
  }
}

void check_stats(const Regressor& model) {
  if (model.input_stats.means.size() != model.spec.input_dim ||
      model.input_stats.stds.size() != model.spec.input_dim) {
    throw ShapeMismatchError("forward: input stats do not match input_dim");
  }
  if (model.output_stats.means.size() != model.spec.output_dim ||
      model.output_stats.stds.size() != model.spec.output_dim) {
    throw ShapeMismatchError("forward: output stats do not match output_dim");
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
    case Activation::Identity:
      return "identity";
  }
  return "relu";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw InvalidConfigError("unknown activation '" + std::string(name) + "'");
}

DenseVector denormalize(std::span<const double> x, const NormStats& stats) {
  if (x.size() != stats.means.size() || x.size() != stats.stds.size()) {
    throw LengthMismatchError("denormalize: expected " + std::to_string(stats.means.size()) +
                              " channels, got " + std::to_string(x.size()));
  }
  DenseVector out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = x[c] * stats.stds[c] + stats.means[c];
  return out;
}

DenseVector normalize(std::span<const double> x, const NormStats& stats) {
  if (x.size() != stats.means.size() || x.size() != stats.stds.size()) {
    throw LengthMismatchError("normalize: expected " + std::to_string(stats.means.size()) +
                              " channels, got " + std::to_string(x.size()));
  }
  DenseVector out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = (x[c] - stats.means[c]) / stats.stds[c];
  return out;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr_min, double lr_max) {
  if (total_steps < 1) throw std::invalid_argument("cosine_lr: total_steps must be >= 1");
  if (step > total_steps) throw std::invalid_argument("cosine_lr: step exceeds total_steps");
  if (lr_min > lr_max) {
    throw InvalidRangeError("cosine_lr: lr_min " + std::to_string(lr_min) + " > lr_max " +
                            std::to_string(lr_max));
  }
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

Regressor init_regressor(const RegressorSpec& spec) {
  if (spec.input_dim < 1 || spec.output_dim < 1) {
    throw InvalidConfigError("regressor: input_dim and output_dim must be >= 1");
  }
  for (std::size_t w : spec.hidden_layers) {
    if (w < 1) throw InvalidConfigError("regressor: hidden layer width must be >= 1");
  }

  Regressor model;
  model.spec = spec;
  model.input_stats.means.assign(spec.input_dim, 0.0);
  model.input_stats.stds.assign(spec.input_dim, 1.0);
  model.output_stats.means.assign(spec.output_dim, 0.0);
  model.output_stats.stds.assign(spec.output_dim, 1.0);

  std::vector<std::size_t> widths;
  widths.push_back(spec.input_dim);
  widths.insert(widths.end(), spec.hidden_layers.begin(), spec.hidden_layers.end());
  widths.push_back(spec.output_dim);

  Rng rng(spec.seed);
  model.layers.reserve(widths.size() - 1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    Layer layer{DenseMatrix(fan_out, fan_in), DenseVector(fan_out, 0.0)};
    const bool is_head = (l + 2 == widths.size());
    if (!is_head) {
      const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double& w : layer.weights.entries()) w = rng.next_uniform(-limit, limit);
    }
    // Head stays zero: a fresh model predicts the output means, i.e. the
    // climatological center of the training targets.
    model.layers.push_back(std::move(layer));
  }
  return model;
}

DenseVector forward(const Regressor& model, std::span<const double> input) {
  if (input.size() != model.spec.input_dim) {
    throw ShapeMismatchError("forward: expected input of length " +
                             std::to_string(model.spec.input_dim) + ", got " +
                             std::to_string(input.size()));
  }
  check_stats(model);
  Workspace ws(model);
  forward_into(model, input, ws);
  return ws.out;
}

DenseMatrix forward_batch(const Regressor& model, const DenseMatrix& inputs) {
  if (inputs.cols() != model.spec.input_dim) {
    throw ShapeMismatchError("forward_batch: expected " + std::to_string(model.spec.input_dim) +
                             " columns, got " + std::to_string(inputs.cols()));
  }
  check_stats(model);
  DenseMatrix out(inputs.rows(), model.spec.output_dim);
  Workspace ws(model);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    forward_into(model, inputs.row(i), ws);
    std::ranges::copy(ws.out, out.row(i).begin());
  }
  return out;
}

double mean_absolute_error(const Regressor& model, const DenseMatrix& inputs,
                           const DenseMatrix& targets) {
  if (inputs.rows() != targets.rows()) {
    throw LengthMismatchError("mean_absolute_error: row count mismatch");
  }
  if (inputs.rows() == 0) throw EmptyInputError("mean_absolute_error: no samples");
  check_stats(model);
  Workspace ws(model);
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    forward_into(model, inputs.row(i), ws);
    const auto tgt = targets.row(i);
    for (std::size_t c = 0; c < tgt.size(); ++c) total += std::abs(ws.out[c] - tgt[c]);
  }
  return total / (static_cast<double>(inputs.rows()) * static_cast<double>(targets.cols()));
}

Regressor train(const RegressorSpec& spec, const DenseMatrix& inputs, const DenseMatrix& targets,
                const TrainConfig& cfg) {
  if (inputs.rows() == 0) throw EmptyTrainingSetError("train: empty training set");
  if (inputs.rows() != targets.rows()) throw LengthMismatchError("train: row count mismatch");
  if (inputs.cols() != spec.input_dim) {
    throw ShapeMismatchError("train: input columns " + std::to_string(inputs.cols()) +
                             " != spec.input_dim " + std::to_string(spec.input_dim));
  }
  if (targets.cols() != spec.output_dim) {
    throw ShapeMismatchError("train: target columns " + std::to_string(targets.cols()) +
                             " != spec.output_dim " + std::to_string(spec.output_dim));
  }
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

  Regressor model = init_regressor(spec);
  model.input_stats = mean_std_per_channel(inputs);
  model.output_stats = mean_std_per_channel(targets);

  const std::size_t n = inputs.rows();
  const std::size_t n_out = targets.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Rng shuffle_rng(cfg.shuffle_seed);
  Workspace ws(model);
  Gradients grads(model);
  AdamState adam(model);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.lr_min, cfg.lr_max);
    // Fisher-Yates with the pinned generator.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_below(i + 1));
      std::swap(order[i], order[j]);
    }
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      const double scale = 1.0 / (static_cast<double>(end - begin) * static_cast<double>(n_out));
      grads.zero();
      double batch_abs_err = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t row = order[k];
        forward_into(model, inputs.row(row), ws);
        batch_abs_err += backward_into(model, targets.row(row), scale, ws, grads);
      }
      if (!std::isfinite(batch_abs_err)) {
        throw DivergenceDetectedError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      adam_step(model, grads, adam, lr);
    }
  }
  return model;
}

Regressor train(const RegressorSpec& spec, const WindowedSamples& data, const TrainConfig& cfg) {
  return train(spec, data.inputs, data.targets, cfg);
}

double gradient_check(const Regressor& model, std::span<const double> input,
                      std::span<const double> target) {
  if (input.size() != model.spec.input_dim || target.size() != model.spec.output_dim) {
    throw std::invalid_argument("gradient_check: sample shape mismatch");
  }

  // Analytic gradients of the per-sample MAE (mean over channels).
  Workspace ws(model);
  Gradients analytic(model);
  const double scale = 1.0 / static_cast<double>(target.size());
  forward_into(model, input, ws);
  backward_into(model, target, scale, ws, analytic);

  Regressor probe = model;
  const auto loss_at = [&](const Regressor& m) {
    Workspace w(m);
    forward_into(m, input, w);
    double s = 0.0;
    for (std::size_t c = 0; c < target.size(); ++c) s += std::abs(w.out[c] - target[c]);
    return s * scale;
  };

  constexpr double kStep = 1e-5;
  double worst = 0.0;
  const auto probe_param = [&](double& param, double analytic_grad) {
    const double saved = param;
    param = saved + kStep;
    const double up = loss_at(probe);
    param = saved - kStep;
    const double down = loss_at(probe);
    param = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double rel = std::abs(analytic_grad - numeric) /
                       std::max(1.0, std::abs(analytic_grad) + std::abs(numeric));
    worst = std::max(worst, rel);
  };

  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& w = probe.layers[l].weights.entries();
    const auto& gw = analytic.layers[l].weights.entries();
    for (std::size_t i = 0; i < w.size(); ++i) probe_param(w[i], gw[i]);
    auto& b = probe.layers[l].biases;
    const auto& gb = analytic.layers[l].biases;
    for (std::size_t i = 0; i < b.size(); ++i) probe_param(b[i], gb[i]);
  }
  return worst;
}

}  // namespace latefuse
