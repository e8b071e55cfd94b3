// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <set>

#include <doctest.h>

#include "latefuse/experiment.hpp"
#include "latefuse/io.hpp"

using namespace latefuse;
namespace fs = std::filesystem;

namespace {

// Small enough to train in well under a second, big enough to exercise the
// whole pipeline.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg = default_experiment_config();
  cfg.synth->length = 10 * 52;
  cfg.synth->channels.resize(2);
  for (auto& ch : cfg.synth->channels) {
    for (auto& s : ch.sinusoids) {
      if (s.period > 110.0) s.period = 104.0;
    }
  }
  cfg.split.train = {0, 6 * 52};
  cfg.split.val = {6 * 52, 8 * 52};
  cfg.split.test = {8 * 52, 10 * 52};
  cfg.lead_times = {2, 5};
  cfg.models_per_lead = 2;
  cfg.hidden_layers = {6};
  cfg.train.epochs = 4;
  cfg.climate.window_years = 5;
  cfg.master_seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("derive_seed: deterministic, sensitive to every argument") {
  CHECK(derive_seed(1, 5, 0) == derive_seed(1, 5, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {1ull, 2ull}) {
    for (std::uint64_t lead : {5ull, 10ull}) {
      for (std::uint64_t idx = 0; idx < 8; ++idx) seen.insert(derive_seed(master, lead, idx));
    }
  }
  CHECK(seen.size() == 2 * 2 * 8);
}

TEST_CASE("config: defaults validate and round-trip through JSON") {
  const ExperimentConfig cfg = default_experiment_config();
  validate(cfg);
  const std::string text = format_experiment_config(cfg);
  const ExperimentConfig back = parse_experiment_config(text, "roundtrip");
  CHECK(back.synth == cfg.synth);
  CHECK(back.split == cfg.split);
  CHECK(back.lead_times == cfg.lead_times);
  CHECK(back.models_per_lead == cfg.models_per_lead);
  CHECK(back.hidden_layers == cfg.hidden_layers);
  CHECK(back.train == cfg.train);
  CHECK(back.climate == cfg.climate);
  CHECK(back.master_seed == cfg.master_seed);
}

TEST_CASE("config: malformed inputs are rejected") {
  CHECK_THROWS_AS(parse_experiment_config("{", "t"), InvalidConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"no_such_key": 1})", "t"), InvalidConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"train": {"epochs": "many"}})", "t"),
                  InvalidConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"split": {"train": [0]}})", "t"),
                  InvalidConfigError);

  ExperimentConfig cfg = default_experiment_config();
  cfg.lead_times.clear();
  CHECK_THROWS_AS(validate(cfg), InvalidConfigError);
  cfg = default_experiment_config();
  cfg.synth.reset();
  CHECK_THROWS_AS(validate(cfg), InvalidConfigError);
  cfg = default_experiment_config();
  cfg.train.lr_min = 1.0;
  CHECK_THROWS_AS(validate(cfg), InvalidConfigError);
}

TEST_CASE("run_experiment: report structure and K=1 collapse") {
  ExperimentConfig cfg = tiny_config();
  cfg.models_per_lead = 1;
  const ExperimentResult result = run_experiment(cfg);

  // late_fusion, best_model, single_model_0, climatology per channel/lead.
  CHECK(result.report.rows.size() == 2 * 2 * 4);
  for (std::int64_t lead : cfg.lead_times) {
    for (const auto& channel : result.channels) {
      const SkillRow* lf = result.report.find(channel, lead, framework::late_fusion);
      const SkillRow* bm = result.report.find(channel, lead, framework::best_model);
      REQUIRE(lf != nullptr);
      REQUIRE(bm != nullptr);
      CHECK(lf->rmse_model == bm->rmse_model);
      CHECK(lf->rmsess == bm->rmsess);
    }
  }
  for (const auto& lead : result.leads) {
    CHECK(lead.best_model_index == 0);
    for (const auto& ch : lead.channels) CHECK(ch.weights.weights == DenseVector{1.0});
  }
}

TEST_CASE("run_experiment: deterministic and independent of jobs") {
  ExperimentConfig cfg = tiny_config();
  const ExperimentResult a = run_experiment(cfg);
  cfg.jobs = 4;
  const ExperimentResult b = run_experiment(cfg);
  CHECK(format_skill_report_csv(a.report) == format_skill_report_csv(b.report));
  CHECK(format_weights_json(a.leads, cfg.ridge_epsilon) ==
        format_weights_json(b.leads, cfg.ridge_epsilon));
  CHECK(format_sweep_csv(a.sweep) == format_sweep_csv(b.sweep));
}

TEST_CASE("run_experiment: weight invariants hold per lead and channel") {
  const ExperimentResult result = run_experiment(tiny_config());
  for (const auto& lead : result.leads) {
    for (const auto& ch : lead.channels) {
      double sum = 0.0;
      for (double v : ch.weights.weights) sum += v;
      CHECK(std::abs(sum - 1.0) <= 1e-10);
      double min_diag = ch.m_diag[0];
      for (double v : ch.m_diag) min_diag = std::min(min_diag, v);
      CHECK(ch.expected_sq_error <= min_diag + 1e-9);
    }
  }
}

TEST_CASE("run_experiment: constant channels fail with a typed error, never a crash") {
  ExperimentConfig cfg = tiny_config();
  for (auto& ch : cfg.synth->channels) {
    ch.sinusoids.clear();
    ch.trend = 0.0;
    ch.noise_std = 0.0;
  }
  // Zero-head models reproduce the constant exactly, so the climatology
  // baseline has zero error and the skill score is undefined.
  try {
    run_experiment(cfg);
    FAIL("expected a typed error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("climatology") != std::string::npos);
  }
}

TEST_CASE("run_experiment: aggregation factor rescales the pipeline") {
  ExperimentConfig cfg = tiny_config();
  cfg.synth->length *= 2;
  for (auto& ch : cfg.synth->channels) {
    for (auto& s : ch.sinusoids) s.period *= 2.0;
  }
  cfg.aggregate_factor = 2;  // back to the tiny series' coarse resolution
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.report.rows.size() == 2 * 2 * 5);
}

TEST_CASE("run_experiment: errors carry lead/model context") {
  ExperimentConfig cfg = tiny_config();
  cfg.lead_times = {2, 600};  // second lead cannot be windowed from 520 steps of data
  try {
    run_experiment(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("lead_time=600") != std::string::npos);
  }
}

TEST_CASE("reports: written atomically and byte-identical across runs") {
  ExperimentConfig cfg = tiny_config();
  const auto base = fs::temp_directory_path() / "latefuse_report_test";
  fs::remove_all(base);
  cfg.out_dir = base / "run1";
  run_experiment_with_reports(cfg);
  cfg.out_dir = base / "run2";
  run_experiment_with_reports(cfg);

  const std::vector<std::string> files{"config.json",     "skill_report.csv",
                                       "skill_report.json", "weights.json",
                                       "ensemble_sweep.csv", "curves_site_a.csv",
                                       "curves_site_b.csv"};
  for (const auto& name : files) {
    CAPTURE(name);
    REQUIRE(fs::exists(base / "run1" / name));
    std::string a = read_file(base / "run1" / name);
    std::string b = read_file(base / "run2" / name);
    if (name == "config.json") continue;  // differs in out_dir only
    CHECK(a == b);
  }
  const WeightsFile weights = parse_weights_json(read_file(base / "run1" / "weights.json"),
                                                 "weights.json");
  CHECK(weights.leads.size() == 2);
  CHECK(weights.leads[0].channels.size() == 2);
  fs::remove_all(base);
}

TEST_CASE("reports: curves table has one column per framework") {
  const ExperimentResult result = run_experiment(tiny_config());
  const std::string curves = format_curves_csv(result.report, "site_a");
  CHECK(curves.find("lead_time,late_fusion,best_model,single_model_0,single_model_1,"
                    "climatology\n") == 0);
  CHECK(curves.find("\n2,") != std::string::npos);
  CHECK(curves.find("\n5,") != std::string::npos);
}
