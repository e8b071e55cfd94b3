// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latefuse/dataset.hpp"
#include "latefuse/evaluation.hpp"
#include "latefuse/fusion.hpp"
#include "latefuse/model.hpp"

namespace latefuse {

/// Full description of one experiment run: data source, windowing, ensemble
/// size, model template, training setup, evaluation baseline, outputs.
struct ExperimentConfig {
  // Exactly one data source.
  std::optional<SynthConfig> synth;
  std::optional<std::filesystem::path> csv_path;
  /// Seed for synthetic data; when unset it is derived from the master seed.
  std::optional<std::uint64_t> data_seed;

  std::int64_t aggregate_factor = 1;
  std::int64_t horizon = 6;
  std::vector<std::int64_t> lead_times = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  SplitSpec split;
  std::size_t models_per_lead = 8;
  std::vector<std::size_t> hidden_layers = {32};
  Activation activation = Activation::Relu;
  TrainConfig train;
  ClimateNormalConfig climate;
  /// Ensemble sizes for the size sweep; empty means 1..models_per_lead.
  std::vector<std::size_t> sweep_sizes;
  double ridge_epsilon = 1e-8;

  std::filesystem::path out_dir = "latefuse-out";
  std::uint64_t master_seed = 1;
  unsigned jobs = 1;
};

/// Desk-scale defaults: a 40-cycle weekly synthetic workload with two
/// channels, an annual cycle, a slower climatology-invisible mode, a warming
/// trend, and observation noise; 8 models per lead time, lead times 5..50.
ExperimentConfig default_experiment_config();

/// Parses the JSON config dialect (see README). Unknown keys are rejected.
/// Throws InvalidConfigError / IoError.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin);

/// Serialized resolved config, written next to the reports.
std::string format_experiment_config(const ExperimentConfig& cfg);

/// Validates cross-field constraints. Throws InvalidConfigError.
void validate(const ExperimentConfig& cfg);

/// Stable per-model seed derivation from the master seed:
///   derive_seed(master, lead, index) =
///     splitmix64(splitmix64(master ^ splitmix64(lead)) ^ index)
/// Model j at a given lead time trains with weight seed
/// derive_seed(master, lead, 2j) and shuffle seed derive_seed(master, lead,
/// 2j + 1); synthetic data defaults to derive_seed(master, 0, 0).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t lead, std::uint64_t index);

/// Per-channel fusion diagnostics for one lead time.
struct ChannelWeightsReport {
  std::string channel;
  FusionWeights weights;
  double expected_sq_error = 0.0;  // w^T M w on the validation split
  DenseVector m_diag;
  std::size_t val_samples = 0;
};

struct LeadOutcome {
  std::int64_t lead_time = 0;
  std::vector<ChannelWeightsReport> channels;
  std::size_t best_model_index = 0;
};

struct ExperimentResult {
  std::vector<std::string> channels;
  SkillReport report;
  std::vector<LeadOutcome> leads;
  std::vector<SweepPoint> sweep;
};

/// Runs the whole experiment in memory: generate or load data, train
/// models_per_lead seed-varied regressors per lead time, fit fusion weights
/// on validation, evaluate late fusion / best model / every single model /
/// climatology on test, and run the ensemble-size sweep. Deterministic for a
/// fixed (config, master_seed) regardless of the jobs count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// run_experiment plus report files in cfg.out_dir: skill_report.csv/.json,
/// weights.json, curves_<channel>.csv, ensemble_sweep.csv, config.json.
/// Files are written atomically.
ExperimentResult run_experiment_with_reports(const ExperimentConfig& cfg);

/// Report serialization, exposed for the standalone CLI subcommands.
std::string format_skill_report_csv(const SkillReport& report);
std::string format_skill_report_json(const SkillReport& report);
std::string format_weights_json(const std::vector<LeadOutcome>& leads, double ridge_epsilon);
std::string format_sweep_csv(const std::vector<SweepPoint>& sweep);
std::string format_curves_csv(const SkillReport& report, const std::string& channel);
void write_experiment_reports(const ExperimentConfig& cfg, const ExperimentResult& result);

struct WeightsFile {
  double ridge_epsilon = 1e-8;
  std::vector<LeadOutcome> leads;
};

/// Parses the weights.json schema back. Throws DataFormatError.
WeightsFile parse_weights_json(const std::string& text, const std::string& origin);

}  // namespace latefuse
