// SPDX-License-Identifier: Apache-2.0
#include "dpst/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "dpst/cli/config.hpp"
#include "dpst/error.hpp"

#ifndef DPST_VERSION
#define DPST_VERSION "0.0.0"
#endif

namespace dpst::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load(const CommandOptions &opts) {
  RunConfig cfg = opts.config ? parse_config_file(*opts.config) : RunConfig{};
  if (opts.seed) cfg.scenario.master_seed = *opts.seed;
  cfg.scenario.validate();
  return cfg;
}

std::vector<sim::SimMode> requested_modes(const CommandOptions &opts, const RunConfig &cfg, bool default_all) {
  const std::vector<sim::SimMode> all = {sim::SimMode::Correlated, sim::SimMode::Rayleigh, sim::SimMode::Dpst,
                                         sim::SimMode::Optimum};
  if (!opts.mode) return default_all ? all : std::vector<sim::SimMode>{cfg.scenario.mode};
  if (*opts.mode == "all") return all;
  const auto m = sim::parse_sim_mode(*opts.mode);
  if (!m) throw ConfigError("--mode", "expected correlated, rayleigh, dpst, optimum or all, got '" + *opts.mode + "'");
  return {*m};
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (!f) throw IoError("cannot write " + path.string());
}

json delays_json(const std::vector<double> &d) {
  json a = json::array();
  for (double v : d) a.push_back(v);
  return a;
}

json base_manifest(const char *command, const RunConfig &cfg, const CommandOptions &opts) {
  json m;
  m["artifact_version"] = DPST_VERSION;
  m["command"] = command;
  m["seed"] = cfg.scenario.master_seed;
  m["threads"] = opts.threads;
  m["config_echo"] = serialize_config(cfg);
  json notes = json::array();
  if (cfg.assumed_symbol_period_ns)
    notes.push_back("delays were given in ns and divided by assumed_symbol_period_ns = " +
                    format_double(*cfg.assumed_symbol_period_ns) + " to obtain symbol-period fractions");
  m["notes"] = notes;
  return m;
}

void finish_manifest(json &m, std::chrono::steady_clock::time_point start, const fs::path &out_dir,
                     std::vector<std::string> outputs) {
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outputs.push_back((out_dir / "manifest.json").string());
  m["outputs"] = outputs;
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

template <class Fn>
int guarded(std::ostream &err, Fn &&fn) {
  try {
    return fn();
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_cdf_csv(const fs::path &path, const sim::CdfSeries &cdf) {
  std::string text = "value,cumulative_probability\n";
  const auto &v = cdf.sorted_values();
  for (std::size_t i = 0; i < v.size(); ++i)
    text += format_double(v[i]) + "," + format_double(cdf.cumulative_probability(i)) + "\n";
  write_text(path, text);
}

std::size_t threads_from_env(std::size_t fallback) {
  const char *env = std::getenv("DPST_SIM_THREADS");
  if (!env || !*env) return fallback;
  char *end = nullptr;
  const unsigned long n = std::strtoul(env, &end, 10);
  if (*end != '\0' || n == 0) throw ConfigError("DPST_SIM_THREADS", "expected a positive integer");
  return n;
}

int cmd_simulate(const CommandOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig cfg = load(opts);
    const auto modes = requested_modes(opts, cfg, false);
    const bool suffixed = opts.mode && *opts.mode == "all";
    ensure_dir(opts.out_dir);

    json manifest = base_manifest("simulate", cfg, opts);
    std::vector<std::string> outputs;
    for (sim::SimMode mode : modes) {
      sim::ScenarioConfig sc = cfg.scenario;
      sc.mode = mode;
      const auto res = sim::run_scenario(sc, opts.threads);
      const std::string suffix = suffixed ? "_" + std::string(sim::to_string(mode)) : "";
      for (const char *metric : {"sinr", "throughput", "condnum"}) {
        const fs::path p = opts.out_dir / (std::string(metric) + "_cdf" + suffix + ".csv");
        write_cdf_csv(p, res.cdfs.at(metric));
        outputs.push_back(p.string());
      }
      json mj;
      if (mode == sim::SimMode::Dpst) mj["delays"] = delays_json(res.delays);
      mj["median_effective_sinr_db"] = res.cdfs.at("sinr").percentile(50);
      mj["median_throughput_bps"] = res.cdfs.at("throughput").percentile(50);
      manifest["modes"][std::string(sim::to_string(mode))] = mj;
      out << sim::to_string(mode) << ": median effective SINR " << format_double(res.cdfs.at("sinr").percentile(50))
          << " dB, median throughput " << format_double(res.cdfs.at("throughput").percentile(50)) << " bit/s\n";
    }
    finish_manifest(manifest, start, opts.out_dir, outputs);
    return 0;
  });
}

int cmd_optimize_delay(const CommandOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig cfg = load(opts);
    ensure_dir(opts.out_dir);
    sim::ScenarioConfig sc = cfg.scenario;
    sc.delays.reset();
    optim::DelaySearchResult res;
    const auto delays = sim::resolve_delays(sc, opts.threads, &res);

    const std::size_t free = delays.size() - 1;
    std::string text = "point";
    for (std::size_t j = 1; j <= free; ++j) text += ",tau_" + std::to_string(j);
    text += ",metric,stage\n";
    for (std::size_t i = 0; i < res.metric_trace.size(); ++i) {
      const auto &tp = res.metric_trace[i];
      text += std::to_string(i);
      for (std::size_t j = 1; j < tp.delays.size(); ++j) text += "," + format_double(tp.delays[j]);
      text += "," + format_double(tp.value) + (tp.refinement ? ",refine\n" : ",coarse\n");
    }
    const fs::path trace = opts.out_dir / "delay_trace.csv";
    write_text(trace, text);

    out << "delays:";
    for (std::size_t j = 0; j < delays.size(); ++j) out << (j ? ", " : " ") << format_double(delays[j]);
    out << "\nobjective (" << optim::to_string(sc.search.metric) << "): " << format_double(res.objective_value)
        << "\nsingular values within [1 - eps, 1 + eps]: " << (res.within_epsilon ? "yes" : "no") << " (";
    for (std::size_t j = 0; j < res.mean_normalized_sigma.size(); ++j)
      out << (j ? ", " : "") << format_double(res.mean_normalized_sigma[j]);
    out << ")\n";

    json manifest = base_manifest("optimize-delay", cfg, opts);
    manifest["delays"] = delays_json(delays);
    manifest["objective"] = res.objective_value;
    manifest["metric"] = optim::to_string(sc.search.metric);
    manifest["within_epsilon"] = res.within_epsilon;
    manifest["coarse_points_per_dim"] = res.coarse_points_per_dim;
    finish_manifest(manifest, start, opts.out_dir, {trace.string()});
    return 0;
  });
}

int cmd_channel_stats(const CommandOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opts);
    const auto modes = requested_modes(opts, cfg, true);
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %10s %16s\n", "mode", "mean_rank", "mean_condition");
    out << cfg.scenario.mimo << "x" << cfg.scenario.mimo << ", " << cfg.scenario.n_drops << " realisations\n" << line;
    for (sim::SimMode mode : modes) {
      std::vector<double> delays;
      if (mode == sim::SimMode::Dpst) delays = sim::resolve_delays(cfg.scenario, opts.threads);
      const auto st = sim::channel_statistics(cfg.scenario, mode, delays, opts.threads);
      std::snprintf(line, sizeof line, "%-12s %10.3f %16.4f\n", std::string(sim::to_string(mode)).c_str(),
                    st.mean_rank, st.mean_condition);
      out << line;
    }
    return 0;
  });
}

}  // namespace dpst::cli
