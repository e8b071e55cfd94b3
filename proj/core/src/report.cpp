// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "latefuse/experiment.hpp"
#include "latefuse/io.hpp"

namespace latefuse {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw InvalidConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

SynthConfig parse_synth(const Json& j, const std::string& where, std::optional<std::uint64_t>& seed) {
  reject_unknown_keys(j, {"length", "start_time", "step_unit", "seed", "channels"}, where);
  SynthConfig synth;
  synth.length = j.at("length").get<std::int64_t>();
  if (j.contains("start_time")) synth.start_time = j.at("start_time").get<std::int64_t>();
  if (j.contains("step_unit")) synth.step_unit = j.at("step_unit").get<std::string>();
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("channels")) throw InvalidConfigError(where + ": missing 'channels'");
  for (const auto& jc : j.at("channels")) {
    const std::string cw = where + ".channels";
    reject_unknown_keys(jc, {"name", "offset", "trend", "noise_std", "sinusoids"}, cw);
    SynthChannel ch;
    ch.name = jc.at("name").get<std::string>();
    if (jc.contains("offset")) ch.offset = jc.at("offset").get<double>();
    if (jc.contains("trend")) ch.trend = jc.at("trend").get<double>();
    if (jc.contains("noise_std")) ch.noise_std = jc.at("noise_std").get<double>();
    if (jc.contains("sinusoids")) {
      for (const auto& js : jc.at("sinusoids")) {
        reject_unknown_keys(js, {"amplitude", "period", "phase"}, cw + ".sinusoids");
        SynthSinusoid s;
        s.amplitude = js.at("amplitude").get<double>();
        s.period = js.at("period").get<double>();
        if (js.contains("phase")) s.phase = js.at("phase").get<double>();
        ch.sinusoids.push_back(s);
      }
    }
    synth.channels.push_back(std::move(ch));
  }
  return synth;
}

Interval parse_interval(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw InvalidConfigError(where + ": interval must be a [begin, end) pair");
  }
  return Interval{j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>()};
}

Json interval_json(const Interval& iv) { return Json::array({iv.begin, iv.end}); }

std::string sanitize_filename(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw InvalidConfigError(origin + ": invalid JSON: " + e.what());
  }

  ExperimentConfig cfg = default_experiment_config();
  try {
    reject_unknown_keys(j,
                        {"data", "aggregate_factor", "horizon", "lead_times", "split",
                         "models_per_lead", "model", "train", "climate_normal", "sweep_sizes",
                         "ridge_epsilon", "out_dir", "master_seed", "jobs"},
                        origin);
    if (j.contains("data")) {
      const Json& jd = j.at("data");
      reject_unknown_keys(jd, {"synth", "csv"}, origin + ".data");
      cfg.synth.reset();
      cfg.csv_path.reset();
      cfg.data_seed.reset();
      if (jd.contains("synth")) {
        cfg.synth = parse_synth(jd.at("synth"), origin + ".data.synth", cfg.data_seed);
      }
      if (jd.contains("csv")) cfg.csv_path = jd.at("csv").get<std::string>();
    }
    if (j.contains("aggregate_factor")) {
      cfg.aggregate_factor = j.at("aggregate_factor").get<std::int64_t>();
    }
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<std::int64_t>();
    if (j.contains("lead_times")) {
      cfg.lead_times = j.at("lead_times").get<std::vector<std::int64_t>>();
    }
    if (j.contains("split")) {
      const Json& js = j.at("split");
      reject_unknown_keys(js, {"train", "val", "test"}, origin + ".split");
      cfg.split.train = parse_interval(js.at("train"), origin + ".split.train");
      cfg.split.val = parse_interval(js.at("val"), origin + ".split.val");
      cfg.split.test = parse_interval(js.at("test"), origin + ".split.test");
    }
    if (j.contains("models_per_lead")) {
      cfg.models_per_lead = j.at("models_per_lead").get<std::size_t>();
    }
    if (j.contains("model")) {
      const Json& jm = j.at("model");
      reject_unknown_keys(jm, {"hidden_layers", "activation"}, origin + ".model");
      if (jm.contains("hidden_layers")) {
        cfg.hidden_layers = jm.at("hidden_layers").get<std::vector<std::size_t>>();
      }
      if (jm.contains("activation")) {
        cfg.activation = activation_from_string(jm.at("activation").get<std::string>());
      }
    }
    if (j.contains("train")) {
      const Json& jt = j.at("train");
      reject_unknown_keys(jt, {"epochs", "batch_size", "lr_min", "lr_max"}, origin + ".train");
      if (jt.contains("epochs")) cfg.train.epochs = jt.at("epochs").get<std::size_t>();
      if (jt.contains("batch_size")) cfg.train.batch_size = jt.at("batch_size").get<std::size_t>();
      if (jt.contains("lr_min")) cfg.train.lr_min = jt.at("lr_min").get<double>();
      if (jt.contains("lr_max")) cfg.train.lr_max = jt.at("lr_max").get<double>();
    }
    if (j.contains("climate_normal")) {
      const Json& jc = j.at("climate_normal");
      reject_unknown_keys(jc, {"window_years", "period_length"}, origin + ".climate_normal");
      if (jc.contains("window_years")) {
        cfg.climate.window_years = jc.at("window_years").get<std::int64_t>();
      }
      if (jc.contains("period_length")) {
        cfg.climate.period_length = jc.at("period_length").get<std::int64_t>();
      }
    }
    if (j.contains("sweep_sizes")) {
      cfg.sweep_sizes = j.at("sweep_sizes").get<std::vector<std::size_t>>();
    }
    if (j.contains("ridge_epsilon")) cfg.ridge_epsilon = j.at("ridge_epsilon").get<double>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<unsigned>();
  } catch (const Json::exception& e) {
    throw InvalidConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path), path.string());
}

std::string format_experiment_config(const ExperimentConfig& cfg) {
  Json j;
  Json data;
  if (cfg.synth) {
    Json js;
    js["length"] = cfg.synth->length;
    js["start_time"] = cfg.synth->start_time;
    js["step_unit"] = cfg.synth->step_unit;
    if (cfg.data_seed) js["seed"] = *cfg.data_seed;
    Json channels = Json::array();
    for (const auto& ch : cfg.synth->channels) {
      Json jc;
      jc["name"] = ch.name;
      jc["offset"] = ch.offset;
      jc["trend"] = ch.trend;
      jc["noise_std"] = ch.noise_std;
      Json sinusoids = Json::array();
      for (const auto& s : ch.sinusoids) {
        sinusoids.push_back(Json{{"amplitude", s.amplitude}, {"period", s.period},
                                 {"phase", s.phase}});
      }
      jc["sinusoids"] = std::move(sinusoids);
      channels.push_back(std::move(jc));
    }
    js["channels"] = std::move(channels);
    data["synth"] = std::move(js);
  }
  if (cfg.csv_path) data["csv"] = cfg.csv_path->string();
  j["data"] = std::move(data);
  j["aggregate_factor"] = cfg.aggregate_factor;
  j["horizon"] = cfg.horizon;
  j["lead_times"] = cfg.lead_times;
  j["split"] = Json{{"train", interval_json(cfg.split.train)},
                    {"val", interval_json(cfg.split.val)},
                    {"test", interval_json(cfg.split.test)}};
  j["models_per_lead"] = cfg.models_per_lead;
  j["model"] = Json{{"hidden_layers", cfg.hidden_layers},
                    {"activation", to_string(cfg.activation)}};
  j["train"] = Json{{"epochs", cfg.train.epochs},
                    {"batch_size", cfg.train.batch_size},
                    {"lr_min", cfg.train.lr_min},
                    {"lr_max", cfg.train.lr_max}};
  j["climate_normal"] = Json{{"window_years", cfg.climate.window_years},
                             {"period_length", cfg.climate.period_length}};
  j["sweep_sizes"] = cfg.sweep_sizes;
  j["ridge_epsilon"] = cfg.ridge_epsilon;
  j["out_dir"] = cfg.out_dir.string();
  j["master_seed"] = cfg.master_seed;
  j["jobs"] = cfg.jobs;
  return j.dump(2) + "\n";
}

std::string format_skill_report_csv(const SkillReport& report) {
  std::string out = "channel,lead_time,framework,rmse_model,rmse_clim,rmsess\n";
  for (const SkillRow& row : report.rows) {
    out += row.channel + ',' + std::to_string(row.lead_time) + ',' + row.framework + ',' +
           format_double(row.rmse_model) + ',' + format_double(row.rmse_clim) + ',' +
           format_double(row.rmsess) + '\n';
  }
  return out;
}

std::string format_skill_report_json(const SkillReport& report) {
  Json rows = Json::array();
  for (const SkillRow& row : report.rows) {
    rows.push_back(Json{{"channel", row.channel},
                        {"lead_time", row.lead_time},
                        {"framework", row.framework},
                        {"rmse_model", row.rmse_model},
                        {"rmse_clim", row.rmse_clim},
                        {"rmsess", row.rmsess}});
  }
  Json j;
  j["schema_version"] = 1;
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string format_weights_json(const std::vector<LeadOutcome>& leads, double ridge_epsilon) {
  Json jleads = Json::array();
  for (const LeadOutcome& lead : leads) {
    Json channels = Json::array();
    for (const ChannelWeightsReport& ch : lead.channels) {
      channels.push_back(Json{{"channel", ch.channel},
                              {"models", ch.weights.weights.size()},
                              {"weights", ch.weights.weights},
                              {"ridge_used", ch.weights.ridge_used},
                              {"expected_sq_error", ch.expected_sq_error},
                              {"m_diag", ch.m_diag},
                              {"val_samples", ch.val_samples}});
    }
    jleads.push_back(Json{{"lead_time", lead.lead_time},
                          {"best_model_index", lead.best_model_index},
                          {"channels", std::move(channels)}});
  }
  Json j;
  j["schema_version"] = 1;
  j["ridge_epsilon"] = ridge_epsilon;
  j["leads"] = std::move(jleads);
  return j.dump(2) + "\n";
}

std::string format_sweep_csv(const std::vector<SweepPoint>& sweep) {
  std::string out = "size,late_fusion_avg_rmsess,best_model_avg_rmsess\n";
  for (const SweepPoint& p : sweep) {
    out += std::to_string(p.size) + ',' + format_double(p.late_fusion_rmsess) + ',' +
           format_double(p.best_model_rmsess) + '\n';
  }
  return out;
}

std::string format_curves_csv(const SkillReport& report, const std::string& channel) {
  // Frameworks in first-appearance order; lead times in first-appearance
  // order. Both follow the construction order of the report.
  std::vector<std::string> frameworks;
  std::vector<std::int64_t> lead_times;
  for (const SkillRow& row : report.rows) {
    if (row.channel != channel) continue;
    if (std::find(frameworks.begin(), frameworks.end(), row.framework) == frameworks.end()) {
      frameworks.push_back(row.framework);
    }
    if (std::find(lead_times.begin(), lead_times.end(), row.lead_time) == lead_times.end()) {
      lead_times.push_back(row.lead_time);
    }
  }

  std::string out = "lead_time";
  for (const auto& f : frameworks) out += ',' + f;
  out += '\n';
  for (std::int64_t lead : lead_times) {
    out += std::to_string(lead);
    for (const auto& f : frameworks) {
      const SkillRow* row = report.find(channel, lead, f);
      out += ',';
      if (row) out += format_double(row->rmsess);
    }
    out += '\n';
  }
  return out;
}

WeightsFile parse_weights_json(const std::string& text, const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataFormatError(origin + ": invalid JSON: " + e.what());
  }
  try {
    WeightsFile out;
    if (j.at("schema_version").get<int>() != 1) {
      throw DataFormatError(origin + ": unsupported schema_version");
    }
    if (j.contains("ridge_epsilon")) out.ridge_epsilon = j.at("ridge_epsilon").get<double>();
    for (const auto& jl : j.at("leads")) {
      LeadOutcome lead;
      lead.lead_time = jl.at("lead_time").get<std::int64_t>();
      if (jl.contains("best_model_index")) {
        lead.best_model_index = jl.at("best_model_index").get<std::size_t>();
      }
      for (const auto& jc : jl.at("channels")) {
        ChannelWeightsReport ch;
        ch.channel = jc.at("channel").get<std::string>();
        ch.weights.weights = jc.at("weights").get<DenseVector>();
        if (jc.contains("ridge_used")) ch.weights.ridge_used = jc.at("ridge_used").get<double>();
        if (jc.contains("expected_sq_error")) {
          ch.expected_sq_error = jc.at("expected_sq_error").get<double>();
        }
        if (jc.contains("m_diag")) ch.m_diag = jc.at("m_diag").get<DenseVector>();
        if (jc.contains("val_samples")) ch.val_samples = jc.at("val_samples").get<std::size_t>();
        lead.channels.push_back(std::move(ch));
      }
      out.leads.push_back(std::move(lead));
    }
    return out;
  } catch (const Json::exception& e) {
    throw DataFormatError(origin + ": " + e.what());
  }
}

void write_experiment_reports(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string());

  atomic_write_file(cfg.out_dir / "config.json", format_experiment_config(cfg));
  atomic_write_file(cfg.out_dir / "skill_report.csv", format_skill_report_csv(result.report));
  atomic_write_file(cfg.out_dir / "skill_report.json", format_skill_report_json(result.report));
  atomic_write_file(cfg.out_dir / "weights.json",
                    format_weights_json(result.leads, cfg.ridge_epsilon));
  atomic_write_file(cfg.out_dir / "ensemble_sweep.csv", format_sweep_csv(result.sweep));
  for (const std::string& channel : result.channels) {
    atomic_write_file(cfg.out_dir / ("curves_" + sanitize_filename(channel) + ".csv"),
                      format_curves_csv(result.report, channel));
  }
}

}  // namespace latefuse
