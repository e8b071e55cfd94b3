// SPDX-License-Identifier: Apache-2.0
//
// End-to-end tests that drive the installed binary the way a user would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "latefuse/dataset.hpp"
#include "latefuse/experiment.hpp"
#include "latefuse/io.hpp"

namespace fs = std::filesystem;
using namespace latefuse;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "latefuse_cli_tests";

int run(const std::string& args) {
  const std::string cmd = std::string(LATEFUSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct WorkDir {
  WorkDir() {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
  }
};

std::string tiny_config_json(std::uint64_t master_seed) {
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
  cfg.master_seed = master_seed;
  return format_experiment_config(cfg);
}

}  // namespace

TEST_CASE("cli: synth is deterministic and round-trips") {
  WorkDir wd;
  const fs::path cfg = kWorkDir / "cfg.json";
  atomic_write_file(cfg, tiny_config_json(5));
  const fs::path a = kWorkDir / "a.csv";
  const fs::path b = kWorkDir / "b.csv";

  CHECK(run("synth --config " + cfg.string() + " --out " + a.string()) == 0);
  CHECK(run("synth --config " + cfg.string() + " --out " + b.string()) == 0);
  CHECK(read_file(a) == read_file(b));

  const TimeSeries series = read_timeseries_csv(a);
  CHECK(series.length() == 520);
  CHECK(series.channels == std::vector<std::string>{"site_a", "site_b"});
}

TEST_CASE("cli: exit codes for config, data, and usage errors") {
  WorkDir wd;
  // Config error: invalid synth length.
  const fs::path bad = kWorkDir / "bad.json";
  atomic_write_file(bad, R"({"data": {"synth": {"length": 0, "channels": [
    {"name": "x"}]}}})");
  CHECK(run("synth --config " + bad.string() + " --out " + (kWorkDir / "x.csv").string()) == 2);
  // Unknown config key.
  const fs::path unknown = kWorkDir / "unknown.json";
  atomic_write_file(unknown, R"({"definitely_not_a_key": 1})");
  CHECK(run("experiment --config " + unknown.string()) == 2);
  // Data error: missing CSV.
  CHECK(run("train --data " + (kWorkDir / "missing.csv").string() + " --lead 5 --out " +
            (kWorkDir / "m.lfm").string()) == 3);
  // Usage error: no subcommand.
  CHECK(run("") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("cli: train, predict, fuse-weights, fuse, evaluate pipeline") {
  WorkDir wd;
  const fs::path cfg = kWorkDir / "cfg.json";
  atomic_write_file(cfg, tiny_config_json(7));
  const fs::path data = kWorkDir / "data.csv";
  REQUIRE(run("synth --config " + cfg.string() + " --out " + data.string()) == 0);

  // Train two seed-varied models on the first six years.
  const std::string common = " --data " + data.string() +
                             " --lead 3 --horizon 4 --hidden 6 --epochs 4"
                             " --train-range 0:312 --out ";
  REQUIRE(run("train --seed 1" + common + (kWorkDir / "m1.lfm").string()) == 0);
  REQUIRE(run("train --seed 2" + common + (kWorkDir / "m2.lfm").string()) == 0);

  REQUIRE(run("predict --model " + (kWorkDir / "m1.lfm").string() + " --data " + data.string() +
              " --out " + (kWorkDir / "p1.csv").string()) == 0);
  REQUIRE(run("predict --model " + (kWorkDir / "m2.lfm").string() + " --data " + data.string() +
              " --out " + (kWorkDir / "p2.csv").string()) == 0);

  // Predictions are aligned with the source series at the target times.
  const TimeSeries p1 = read_timeseries_csv(kWorkDir / "p1.csv");
  const TimeSeries source = read_timeseries_csv(data);
  CHECK(p1.start_time == 4 - 1 + 3);  // horizon - 1 + lead
  CHECK(p1.length() == source.length() - 4 - 3 + 1);
  CHECK(p1.channels == source.channels);

  // Truth restricted to the prediction window for weight fitting.
  TimeSeries truth;
  truth.start_time = p1.start_time;
  truth.channels = source.channels;
  truth.values = DenseMatrix(p1.length(), source.channels.size());
  for (std::size_t i = 0; i < p1.length(); ++i) {
    for (std::size_t c = 0; c < source.channels.size(); ++c) {
      truth.values(i, c) = source.values(i + std::size_t(p1.start_time), c);
    }
  }
  write_timeseries_csv(truth, kWorkDir / "truth.csv");

  const std::string preds = (kWorkDir / "p1.csv").string() + "," + (kWorkDir / "p2.csv").string();
  REQUIRE(run("fuse-weights --preds " + preds + " --truth " + (kWorkDir / "truth.csv").string() +
              " --out " + (kWorkDir / "w.json").string()) == 0);

  const WeightsFile weights = parse_weights_json(read_file(kWorkDir / "w.json"), "w.json");
  REQUIRE(weights.leads.size() == 1);
  REQUIRE(weights.leads[0].channels.size() == 2);
  for (const auto& ch : weights.leads[0].channels) {
    double sum = 0.0;
    for (double v : ch.weights.weights) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-10);
  }

  REQUIRE(run("fuse --preds " + preds + " --weights " + (kWorkDir / "w.json").string() +
              " --out " + (kWorkDir / "fused.csv").string()) == 0);
  const TimeSeries fused = read_timeseries_csv(kWorkDir / "fused.csv");
  CHECK(fused.length() == p1.length());

  // Clim = truth shifted; evaluate all three frameworks.
  TimeSeries clim = truth;
  for (double& v : clim.values.entries()) v += 1.0;
  write_timeseries_csv(clim, kWorkDir / "clim.csv");
  REQUIRE(run("evaluate --preds " + preds + "," + (kWorkDir / "fused.csv").string() +
              " --truth " + (kWorkDir / "truth.csv").string() + " --climatology " +
              (kWorkDir / "clim.csv").string() + " --out " + (kWorkDir / "eval").string()) == 0);
  CHECK(fs::exists(kWorkDir / "eval" / "skill_report.csv"));
  CHECK(fs::exists(kWorkDir / "eval" / "skill_report.json"));

  // Misaligned climatology is a data error.
  TimeSeries short_clim = clim;
  short_clim.values = DenseMatrix(10, 2, 1.0);
  write_timeseries_csv(short_clim, kWorkDir / "short_clim.csv");
  CHECK(run("evaluate --preds " + preds + " --truth " + (kWorkDir / "truth.csv").string() +
            " --climatology " + (kWorkDir / "short_clim.csv").string() + " --out " +
            (kWorkDir / "eval2").string()) == 3);
}

TEST_CASE("cli: experiment reruns are byte-identical") {
  WorkDir wd;
  const fs::path cfg = kWorkDir / "cfg.json";
  atomic_write_file(cfg, tiny_config_json(11));
  const fs::path out1 = kWorkDir / "out1";
  const fs::path out2 = kWorkDir / "out2";
  REQUIRE(run("experiment --config " + cfg.string() + " --out " + out1.string()) == 0);
  REQUIRE(run("experiment --config " + cfg.string() + " --out " + out2.string()) == 0);

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    const auto name = entry.path().filename();
    if (name == "config.json") continue;  // embeds the differing out_dir
    CAPTURE(name.string());
    CHECK(read_file(entry.path()) == read_file(out2 / name));
    ++compared;
  }
  CHECK(compared >= 5);
}

TEST_CASE("cli: flag overrides shrink the experiment") {
  WorkDir wd;
  const fs::path cfg = kWorkDir / "cfg.json";
  atomic_write_file(cfg, tiny_config_json(13));
  const fs::path out = kWorkDir / "out";
  REQUIRE(run("experiment --config " + cfg.string() + " --models 1 --lead-times 3 --jobs 2" +
              " --out " + out.string()) == 0);
  const std::string report = read_file(out / "skill_report.csv");
  CHECK(report.find(",3,late_fusion,") != std::string::npos);
  CHECK(report.find(",5,") == std::string::npos);
  CHECK(report.find("single_model_1") == std::string::npos);
}
