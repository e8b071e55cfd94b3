// SPDX-License-Identifier: Apache-2.0
//
// latefuse command line: synthetic data generation, single-model training
// and prediction, fusion weight fitting, fused forecasting, skill
// evaluation, and the full ensemble experiment.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latefuse/dataset.hpp"
#include "latefuse/evaluation.hpp"
#include "latefuse/experiment.hpp"
#include "latefuse/fusion.hpp"
#include "latefuse/io.hpp"
#include "latefuse/model.hpp"

namespace lf = latefuse;
namespace fs = std::filesystem;

namespace {

int exit_code_for(lf::ErrorKind kind) {
  switch (kind) {
    case lf::ErrorKind::Config:
      return 2;
    case lf::ErrorKind::Data:
    case lf::ErrorKind::Io:
      return 3;
    case lf::ErrorKind::Numeric:
      return 4;
  }
  return 1;
}

lf::Interval parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw lf::InvalidConfigError("range must be '<begin>:<end>', got '" + text + "'");
  }
  return lf::Interval{lf::parse_int64(text.substr(0, colon), "range begin"),
                      lf::parse_int64(text.substr(colon + 1), "range end")};
}

// Loads prediction series and checks they are mutually aligned.
std::vector<lf::TimeSeries> load_aligned(const std::vector<std::string>& paths) {
  std::vector<lf::TimeSeries> series;
  series.reserve(paths.size());
  for (const auto& path : paths) series.push_back(lf::read_timeseries_csv(path));
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].start_time != series[0].start_time ||
        series[i].length() != series[0].length() || series[i].channels != series[0].channels) {
      throw lf::MisalignedSamplesError(paths[i] + ": not aligned with " + paths[0]);
    }
  }
  return series;
}

void require_aligned(const lf::TimeSeries& a, const lf::TimeSeries& b, const std::string& what) {
  if (a.start_time != b.start_time || a.length() != b.length() || a.channels != b.channels) {
    throw lf::MisalignedSamplesError(what + ": timestamps or channels do not match");
  }
}

// Per-channel K x N ensembles from K aligned prediction series.
std::vector<lf::EnsemblePredictions> to_ensembles(const std::vector<lf::TimeSeries>& preds) {
  std::vector<lf::EnsemblePredictions> ensembles;
  const std::size_t k = preds.size();
  const std::size_t n = preds[0].length();
  for (std::size_t c = 0; c < preds[0].channels.size(); ++c) {
    lf::EnsemblePredictions ens;
    ens.channel = preds[0].channels[c];
    ens.predictions = lf::DenseMatrix(k, n);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) ens.predictions(j, i) = preds[j].values(i, c);
    }
    ensembles.push_back(std::move(ens));
  }
  return ensembles;
}

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> models;
  std::vector<std::int64_t> lead_times;
  std::optional<unsigned> jobs;
};

lf::ExperimentConfig resolve_config(const std::string& config_path, const CommonOverrides& ov) {
  lf::ExperimentConfig cfg = config_path.empty() ? lf::default_experiment_config()
                                                 : lf::load_experiment_config(config_path);
  if (ov.seed) cfg.master_seed = *ov.seed;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.models) cfg.models_per_lead = *ov.models;
  if (!ov.lead_times.empty()) cfg.lead_times = ov.lead_times;
  if (ov.jobs) cfg.jobs = *ov.jobs;
  return cfg;
}

int cmd_synth(const std::string& config_path, const CommonOverrides& ov,
              const std::string& out_path) {
  lf::ExperimentConfig cfg = resolve_config(config_path, ov);
  if (!cfg.synth) throw lf::InvalidConfigError("synth: config has no synthetic data section");
  const std::uint64_t seed = ov.seed             ? *ov.seed
                             : cfg.data_seed     ? *cfg.data_seed
                                                 : lf::derive_seed(cfg.master_seed, 0, 0);
  const lf::TimeSeries series = lf::synth_generate(*cfg.synth, seed);
  lf::write_timeseries_csv(series, out_path);
  std::cout << "wrote " << out_path << " (" << series.length() << " steps, "
            << series.channels.size() << " channels, seed " << seed << ")\n";
  return 0;
}

struct TrainArgs {
  std::string data_path;
  std::string out_path;
  std::int64_t horizon = 6;
  std::int64_t lead = 0;
  std::vector<std::string> input_channels;
  std::vector<std::string> output_channels;
  std::vector<std::size_t> hidden = {32};
  std::string activation = "relu";
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> shuffle_seed;
  std::string train_range;
};

lf::WindowedSamples filter_by_target_time(const lf::WindowedSamples& samples,
                                          const lf::Interval& range) {
  lf::WindowedSamples out;
  out.horizon = samples.horizon;
  out.lead_time = samples.lead_time;
  out.input_channels = samples.input_channels;
  out.output_channels = samples.output_channels;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (range.contains(samples.sample_times[i])) rows.push_back(i);
  }
  out.inputs = lf::DenseMatrix(rows.size(), samples.inputs.cols());
  out.targets = lf::DenseMatrix(rows.size(), samples.targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ranges::copy(samples.inputs.row(rows[i]), out.inputs.row(i).begin());
    std::ranges::copy(samples.targets.row(rows[i]), out.targets.row(i).begin());
    out.sample_times.push_back(samples.sample_times[rows[i]]);
  }
  return out;
}

int cmd_train(const TrainArgs& args) {
  const lf::TimeSeries series = lf::read_timeseries_csv(args.data_path);
  lf::WindowedSamples windows =
      lf::make_windows(series, args.horizon, args.lead, args.input_channels,
                       args.output_channels);
  if (!args.train_range.empty()) {
    windows = filter_by_target_time(windows, parse_range(args.train_range));
    if (windows.size() == 0) {
      throw lf::EmptyTrainingSetError("train: no samples in --train-range");
    }
  }

  lf::RegressorSpec spec;
  spec.input_dim = windows.inputs.cols();
  spec.output_dim = windows.targets.cols();
  spec.hidden_layers = args.hidden;
  spec.activation = lf::activation_from_string(args.activation);
  spec.seed = args.seed;

  lf::TrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.batch_size = args.batch_size;
  cfg.lr_min = args.lr_min;
  cfg.lr_max = args.lr_max;
  cfg.shuffle_seed = args.shuffle_seed ? *args.shuffle_seed : args.seed;

  const lf::Regressor model = lf::train(spec, windows, cfg);

  lf::WindowMeta meta;
  meta.horizon = args.horizon;
  meta.lead_time = args.lead;
  meta.input_channels = windows.input_channels;
  meta.output_channels = windows.output_channels;
  lf::save_model(args.out_path, model, meta);

  std::cout << "wrote " << args.out_path << " (train MAE "
            << lf::format_double(lf::mean_absolute_error(model, windows.inputs, windows.targets))
            << " over " << windows.size() << " samples)\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  const lf::SavedModel loaded = lf::load_model(model_path);
  const lf::TimeSeries series = lf::read_timeseries_csv(data_path);
  const lf::WindowedSamples windows =
      lf::make_windows(series, loaded.meta.horizon, loaded.meta.lead_time,
                       loaded.meta.input_channels, loaded.meta.output_channels);

  const lf::DenseMatrix preds = lf::forward_batch(loaded.model, windows.inputs);
  lf::TimeSeries out;
  out.step_length = series.step_length;
  out.start_time = windows.sample_times.front();
  out.channels = windows.output_channels;
  out.values = preds;
  lf::write_timeseries_csv(out, out_path);
  std::cout << "wrote " << out_path << " (" << preds.rows() << " forecasts, lead "
            << loaded.meta.lead_time << ")\n";
  return 0;
}

int cmd_fuse_weights(const std::vector<std::string>& pred_paths, const std::string& truth_path,
                     const std::string& out_path, double ridge_epsilon, std::int64_t lead,
                     bool clip_negative) {
  const auto preds = load_aligned(pred_paths);
  const lf::TimeSeries truth = lf::read_timeseries_csv(truth_path);
  require_aligned(preds[0], truth, "fuse-weights: truth vs predictions");

  const auto ensembles = to_ensembles(preds);
  lf::LeadOutcome outcome;
  outcome.lead_time = lead;
  std::vector<lf::DenseMatrix> model_preds;
  for (const auto& p : preds) model_preds.push_back(p.values);
  outcome.best_model_index = lf::best_model_select(model_preds, truth.values);

  for (std::size_t c = 0; c < ensembles.size(); ++c) {
    lf::DenseVector targets(truth.length());
    for (std::size_t i = 0; i < truth.length(); ++i) targets[i] = truth.values(i, c);
    const lf::ErrorMatrix m = lf::error_correlation(ensembles[c], targets);
    lf::FusionWeights w = lf::solve_weights(m, ridge_epsilon);
    if (clip_negative) w = lf::clip_renormalize(w);
    lf::ChannelWeightsReport report;
    report.channel = ensembles[c].channel;
    report.expected_sq_error = lf::expected_sq_error(m, w);
    report.m_diag.resize(ensembles[c].models());
    for (std::size_t j = 0; j < ensembles[c].models(); ++j) report.m_diag[j] = m.m(j, j);
    report.val_samples = truth.length();
    report.weights = std::move(w);
    outcome.channels.push_back(std::move(report));
  }

  lf::atomic_write_file(out_path, lf::format_weights_json({outcome}, ridge_epsilon));
  std::cout << "wrote " << out_path << " (" << pred_paths.size() << " models, "
            << ensembles.size() << " channels)\n";
  return 0;
}

int cmd_fuse(const std::vector<std::string>& pred_paths, const std::string& weights_path,
             const std::string& out_path) {
  const auto preds = load_aligned(pred_paths);
  const lf::WeightsFile weights =
      lf::parse_weights_json(lf::read_file(weights_path), weights_path);
  if (weights.leads.empty()) throw lf::DataFormatError(weights_path + ": no lead entries");
  const lf::LeadOutcome& lead = weights.leads.front();

  const auto ensembles = to_ensembles(preds);
  lf::TimeSeries fused;
  fused.step_length = preds[0].step_length;
  fused.start_time = preds[0].start_time;
  fused.channels = preds[0].channels;
  fused.values = lf::DenseMatrix(preds[0].length(), preds[0].channels.size());
  for (std::size_t c = 0; c < ensembles.size(); ++c) {
    const auto it = std::find_if(lead.channels.begin(), lead.channels.end(),
                                 [&](const auto& ch) { return ch.channel == ensembles[c].channel; });
    if (it == lead.channels.end()) {
      throw lf::DataFormatError(weights_path + ": no weights for channel '" +
                                ensembles[c].channel + "'");
    }
    const lf::DenseVector out = lf::fuse(ensembles[c], it->weights);
    for (std::size_t i = 0; i < out.size(); ++i) fused.values(i, c) = out[i];
  }
  lf::write_timeseries_csv(fused, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& pred_paths, const std::string& truth_path,
                 const std::string& clim_path, const std::string& out_dir, std::int64_t lead) {
  const lf::TimeSeries truth = lf::read_timeseries_csv(truth_path);
  const lf::TimeSeries clim = lf::read_timeseries_csv(clim_path);
  require_aligned(truth, clim, "evaluate: climatology vs truth");

  std::vector<lf::FrameworkPredictions> frameworks;
  for (const auto& path : pred_paths) {
    const lf::TimeSeries series = lf::read_timeseries_csv(path);
    require_aligned(truth, series, "evaluate: " + path + " vs truth");
    frameworks.push_back({fs::path(path).stem().string(), series.values});
  }

  const lf::SkillReport report =
      lf::compare_frameworks(frameworks, truth.values, clim.values, truth.channels, lead);

  fs::create_directories(out_dir);
  lf::atomic_write_file(fs::path(out_dir) / "skill_report.csv",
                        lf::format_skill_report_csv(report));
  lf::atomic_write_file(fs::path(out_dir) / "skill_report.json",
                        lf::format_skill_report_json(report));
  std::cout << "wrote skill_report.csv and skill_report.json to " << out_dir << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const CommonOverrides& ov) {
  const lf::ExperimentConfig cfg = resolve_config(config_path, ov);
  const lf::ExperimentResult result = lf::run_experiment_with_reports(cfg);

  std::cout << "experiment: " << cfg.lead_times.size() << " lead times x "
            << cfg.models_per_lead << " models, channels:";
  for (const auto& ch : result.channels) std::cout << ' ' << ch;
  std::cout << "\n";
  std::cout << "average RMSESS  late_fusion "
            << lf::format_double(result.report.average_rmsess(lf::framework::late_fusion))
            << "  best_model "
            << lf::format_double(result.report.average_rmsess(lf::framework::best_model)) << "\n";
  std::cout << "reports written to " << cfg.out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latefuse: late-fusion ensemble forecasting toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  CommonOverrides ov;
  std::string out_path;

  const auto add_common = [&](CLI::App* sub, bool with_models) {
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { ov.seed = v; }, "Master seed override");
    if (with_models) {
      sub->add_option_function<std::size_t>(
          "--models", [&](std::size_t v) { ov.models = v; }, "Models per lead time");
      sub->add_option("--lead-times", ov.lead_times, "Lead times override")->delimiter(',');
      sub->add_option_function<unsigned>(
          "--jobs", [&](unsigned v) { ov.jobs = v; }, "Concurrent trainings");
    }
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic series as CSV");
  add_common(synth, false);
  synth->add_option("--out", out_path, "Output CSV path")->required();

  // train
  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a single regressor on a CSV series");
  train->add_option("--data", train_args.data_path, "Input CSV series")->required();
  train->add_option("--out", train_args.out_path, "Output model file")->required();
  train->add_option("--horizon", train_args.horizon, "Input horizon (steps)");
  train->add_option("--lead", train_args.lead, "Lead time (steps)")->required();
  train->add_option("--input-channels", train_args.input_channels, "Input channel names")
      ->delimiter(',');
  train->add_option("--output-channels", train_args.output_channels, "Output channel names")
      ->delimiter(',');
  train->add_option("--hidden", train_args.hidden, "Hidden layer widths")->delimiter(',');
  train->add_option("--activation", train_args.activation, "relu | tanh | identity");
  train->add_option("--epochs", train_args.epochs, "Training epochs");
  train->add_option("--batch-size", train_args.batch_size, "Mini-batch size");
  train->add_option("--lr-min", train_args.lr_min, "Cosine schedule minimum LR");
  train->add_option("--lr-max", train_args.lr_max, "Cosine schedule maximum LR");
  train->add_option("--seed", train_args.seed, "Weight init seed");
  train->add_option_function<std::uint64_t>(
      "--shuffle-seed", [&](std::uint64_t v) { train_args.shuffle_seed = v; },
      "Data shuffle seed (defaults to --seed)");
  train->add_option("--train-range", train_args.train_range,
                    "Target-time range '<begin>:<end>' used for training");

  // predict
  std::string model_path, data_path;
  auto* predict = app.add_subcommand("predict", "Forecast with a trained model");
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--data", data_path, "Input CSV series")->required();
  predict->add_option("--out", out_path, "Output predictions CSV")->required();

  // fuse-weights
  std::vector<std::string> pred_paths;
  std::string truth_path, clim_path, weights_path;
  double ridge_epsilon = 1e-8;
  std::int64_t lead_label = 0;
  bool clip_negative = false;
  auto* fw = app.add_subcommand("fuse-weights",
                                "Fit per-channel fusion weights from validation predictions");
  fw->add_option("--preds", pred_paths, "Prediction CSVs, one per model")
      ->required()
      ->delimiter(',');
  fw->add_option("--truth", truth_path, "Validation truth CSV")->required();
  fw->add_option("--out", out_path, "Output weights JSON")->required();
  fw->add_option("--ridge-epsilon", ridge_epsilon, "Ridge fallback scale");
  fw->add_option("--lead", lead_label, "Lead-time label for the report");
  fw->add_flag("--clip-negative", clip_negative, "Clip negative weights and renormalize");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Apply fusion weights to predictions");
  fuse->add_option("--preds", pred_paths, "Prediction CSVs, one per model")
      ->required()
      ->delimiter(',');
  fuse->add_option("--weights", weights_path, "Weights JSON from fuse-weights")->required();
  fuse->add_option("--out", out_path, "Output fused CSV")->required();

  // evaluate
  std::string eval_out_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Skill scores against truth and climatology");
  evaluate->add_option("--preds", pred_paths, "Prediction CSVs, one per framework")
      ->required()
      ->delimiter(',');
  evaluate->add_option("--truth", truth_path, "Truth CSV")->required();
  evaluate->add_option("--climatology", clim_path, "Climatology CSV")->required();
  evaluate->add_option("--out", eval_out_dir, "Output directory")->required();
  evaluate->add_option("--lead", lead_label, "Lead-time label for the report");

  // experiment
  auto* experiment =
      app.add_subcommand("experiment", "Run the full ensemble experiment and write reports");
  add_common(experiment, true);
  experiment->add_option_function<std::string>(
      "--out", [&](const std::string& v) { ov.out = v; }, "Output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(synth)) return cmd_synth(config_path, ov, out_path);
    if (app.got_subcommand(train)) return cmd_train(train_args);
    if (app.got_subcommand(predict)) return cmd_predict(model_path, data_path, out_path);
    if (app.got_subcommand(fw)) {
      return cmd_fuse_weights(pred_paths, truth_path, out_path, ridge_epsilon, lead_label,
                              clip_negative);
    }
    if (app.got_subcommand(fuse)) return cmd_fuse(pred_paths, weights_path, out_path);
    if (app.got_subcommand(evaluate)) {
      return cmd_evaluate(pred_paths, truth_path, clim_path, eval_out_dir, lead_label);
    }
    if (app.got_subcommand(experiment)) return cmd_experiment(config_path, ov);
  } catch (const lf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
