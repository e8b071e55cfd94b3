// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "latefuse/dataset.hpp"
#include "latefuse/experiment.hpp"
#include "latefuse/fusion.hpp"
#include "latefuse/model.hpp"
#include "latefuse/rng.hpp"

using namespace latefuse;

namespace {

DenseMatrix random_spd_system(std::size_t n, Rng& rng) {
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      a(i, j) = rng.next_uniform(-1.0, 1.0);
      off += std::abs(a(i, j));
    }
    a(i, i) = off + 1.0;
  }
  return a;
}

EnsemblePredictions random_ensemble(std::size_t k, std::size_t n, Rng& rng, DenseVector& targets) {
  EnsemblePredictions preds;
  preds.channel = "x";
  preds.predictions = DenseMatrix(k, n);
  targets.resize(n);
  for (double& t : targets) t = rng.next_uniform(-3.0, 3.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      preds.predictions(j, i) = targets[i] + rng.next_uniform(-1.0, 1.0);
    }
  }
  return preds;
}

void BM_SolveLinear(benchmark::State& state) {
  Rng rng(1);
  const std::size_t n = std::size_t(state.range(0));
  const DenseMatrix a = random_spd_system(n, rng);
  DenseVector b(n);
  for (double& v : b) v = rng.next_uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_linear(a, b));
  }
}
BENCHMARK(BM_SolveLinear)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_FusionWeights(benchmark::State& state) {
  Rng rng(2);
  const std::size_t k = std::size_t(state.range(0));
  DenseVector targets;
  const EnsemblePredictions preds = random_ensemble(k, 416, rng, targets);
  for (auto _ : state) {
    const ErrorMatrix m = error_correlation(preds, targets);
    benchmark::DoNotOptimize(solve_weights(m));
  }
}
BENCHMARK(BM_FusionWeights)->Arg(4)->Arg(8)->Arg(16)->Arg(20);

void BM_SynthGenerate(benchmark::State& state) {
  const ExperimentConfig cfg = default_experiment_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_generate(*cfg.synth, 7));
  }
}
BENCHMARK(BM_SynthGenerate);

void BM_MakeWindows(benchmark::State& state) {
  const ExperimentConfig cfg = default_experiment_config();
  const TimeSeries series = synth_generate(*cfg.synth, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(make_windows(series, 6, std::int64_t(state.range(0))));
  }
}
BENCHMARK(BM_MakeWindows)->Arg(5)->Arg(50);

void BM_TrainModel(benchmark::State& state) {
  const ExperimentConfig cfg = default_experiment_config();
  const TimeSeries series = synth_generate(*cfg.synth, 7);
  const SplitResult data = split(make_windows(series, 6, 25), cfg.split);
  RegressorSpec spec;
  spec.input_dim = data.train.inputs.cols();
  spec.output_dim = data.train.targets.cols();
  spec.hidden_layers = {32};
  TrainConfig tc = cfg.train;
  tc.epochs = std::size_t(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(spec, data.train, tc));
  }
}
BENCHMARK(BM_TrainModel)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ForwardBatch(benchmark::State& state) {
  const ExperimentConfig cfg = default_experiment_config();
  const TimeSeries series = synth_generate(*cfg.synth, 7);
  const SplitResult data = split(make_windows(series, 6, 25), cfg.split);
  RegressorSpec spec;
  spec.input_dim = data.train.inputs.cols();
  spec.output_dim = data.train.targets.cols();
  spec.hidden_layers = {32};
  TrainConfig tc = cfg.train;
  tc.epochs = 1;
  const Regressor model = train(spec, data.train, tc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_batch(model, data.test.inputs));
  }
}
BENCHMARK(BM_ForwardBatch);

}  // namespace

BENCHMARK_MAIN();
