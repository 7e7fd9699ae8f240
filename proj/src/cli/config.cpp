// SPDX-License-Identifier: Apache-2.0
#include "dpst/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <system_error>
#include <vector>

#include "dpst/error.hpp"

namespace dpst::cli {

namespace pt = boost::property_tree;

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string &key, const std::string &text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string &key, const std::string &text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

using Setter = std::function<void(RunConfig &, const std::string &key, const std::string &value)>;

const std::map<std::string, std::map<std::string, Setter>> &schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> t;
    auto num = [](double sim::ScenarioConfig::*field) {
      return Setter([field](RunConfig &c, const std::string &k, const std::string &v) {
        c.scenario.*field = to_double(k, v);
      });
    };
    auto &sc = t["scenario"];
    sc["isd_m"] = num(&sim::ScenarioConfig::isd_m);
    sc["area_m"] = num(&sim::ScenarioConfig::area_m);
    sc["antenna_spacing_wl"] = num(&sim::ScenarioConfig::antenna_spacing_wl);
    sc["n_drops"] = [](RunConfig &c, const std::string &k, const std::string &v) { c.scenario.n_drops = to_u64(k, v); };
    sc["master_seed"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.master_seed = to_u64(k, v);
    };
    sc["mimo"] = [](RunConfig &c, const std::string &k, const std::string &v) { c.scenario.mimo = to_u64(k, v); };
    sc["mode"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      const auto m = sim::parse_sim_mode(trim(v));
      if (!m) throw ConfigError(k, "expected correlated, rayleigh, dpst or optimum, got '" + v + "'");
      c.scenario.mode = *m;
    };
    sc["single_cell"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.single_cell = to_bool(k, v);
    };

    auto &sh = t["shaping"];
    sh["symbol_period"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.shaping.symbol_period = to_double(k, v);
    };
    sh["m_len"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.shaping.m_len = to_u64(k, v);
    };
    sh["tx_oversampling"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.shaping.tx_oversampling = to_u64(k, v);
    };
    sh["rx_oversampling"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.shaping.rx_oversampling = to_u64(k, v);
    };
    sh["reference_symbol"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.shaping.reference_symbol = to_u64(k, v);
    };
    sh["assumed_symbol_period_ns"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      const double ns = to_double(k, v);
      if (!(ns > 0.0)) throw ConfigError(k, "must be positive");
      c.assumed_symbol_period_ns = ns;
    };
    // Read after the loop: assumed_symbol_period_ns changes its units.
    sh["delays"] = nullptr;

    auto &se = t["search"];
    se["grid_points_per_dim"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.search.grid_points_per_dim = to_u64(k, v);
    };
    se["epsilon"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.search.epsilon = to_double(k, v);
    };
    se["ensemble_size"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.search.ensemble_size = to_u64(k, v);
    };
    se["evaluation_budget"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.search.evaluation_budget = to_u64(k, v);
    };
    se["ensemble_distance_m"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      c.scenario.search.ensemble_distance_m = to_double(k, v);
    };
    se["max_delay"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      if (trim(v) == "auto")
        c.scenario.search.max_delay.reset();
      else
        c.scenario.search.max_delay = to_double(k, v);
    };
    se["metric"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      const std::string t = trim(v);
      if (t == optim::to_string(optim::SearchMetric::ConditionNumber))
        c.scenario.search.metric = optim::SearchMetric::ConditionNumber;
      else if (t == optim::to_string(optim::SearchMetric::CovarianceDiagonalization))
        c.scenario.search.metric = optim::SearchMetric::CovarianceDiagonalization;
      else
        throw ConfigError(k, "expected condition_number or covariance_diagonalization, got '" + v + "'");
    };

    auto &ra = t["radio"];
    ra["carrier_ghz"] = num(&sim::ScenarioConfig::carrier_ghz);
    ra["bandwidth_hz"] = num(&sim::ScenarioConfig::bandwidth_hz);
    ra["bs_power_dbm"] = num(&sim::ScenarioConfig::bs_power_dbm);
    ra["noise_figure_db"] = num(&sim::ScenarioConfig::noise_figure_db);
    ra["shadowing_sigma_los_db"] = num(&sim::ScenarioConfig::shadowing_sigma_los_db);
    ra["shadowing_sigma_nlos_db"] = num(&sim::ScenarioConfig::shadowing_sigma_nlos_db);
    ra["spectral_efficiency_cap"] = [](RunConfig &c, const std::string &k, const std::string &v) {
      if (trim(v) == "none")
        c.scenario.spectral_efficiency_cap.reset();
      else
        c.scenario.spectral_efficiency_cap = to_double(k, v);
    };
    auto pl = [](double sim::PathLossModel::*field) {
      return Setter([field](RunConfig &c, const std::string &k, const std::string &v) {
        c.scenario.pathloss.*field = to_double(k, v);
      });
    };
    ra["pl_los_slope"] = pl(&sim::PathLossModel::los_slope);
    ra["pl_los_intercept"] = pl(&sim::PathLossModel::los_intercept);
    ra["pl_los_freq_slope"] = pl(&sim::PathLossModel::los_freq_slope);
    ra["pl_nlos_slope"] = pl(&sim::PathLossModel::nlos_slope);
    ra["pl_nlos_intercept"] = pl(&sim::PathLossModel::nlos_intercept);
    ra["pl_nlos_freq_slope"] = pl(&sim::PathLossModel::nlos_freq_slope);
    ra["los_breakpoint_m"] = pl(&sim::PathLossModel::los_breakpoint_m);
    ra["los_decay_m"] = pl(&sim::PathLossModel::los_decay_m);
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_config_string(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  RunConfig cfg;
  std::optional<std::string> delays_text;
  const auto &sections = schema();
  for (const auto &[section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, "key outside of a section");
    const auto sec = sections.find(section);
    if (sec == sections.end()) throw ConfigError(section, "unknown section");
    for (const auto &[key, node] : body) {
      const std::string path = section + "." + key;
      if (!node.empty()) throw ConfigError(path, "nested keys are not supported");
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError(path, "unknown key");
      if (it->second)
        it->second(cfg, path, node.data());
      else
        delays_text = node.data();
    }
  }

  if (delays_text) {
    const std::string t = trim(*delays_text);
    if (t != "optimize") {
      auto d = to_list("shaping.delays", t);
      if (cfg.assumed_symbol_period_ns)
        for (double &v : d) v = v / *cfg.assumed_symbol_period_ns * cfg.scenario.shaping.symbol_period;
      cfg.scenario.delays = std::move(d);
    }
  }
  cfg.scenario.validate();
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str());
}

std::string serialize_config(const RunConfig &cfg) {
  const auto &s = cfg.scenario;
  std::ostringstream o;
  const auto d = [](double v) { return format_double(v); };
  o << "[scenario]\n"
    << "isd_m = " << d(s.isd_m) << "\n"
    << "area_m = " << d(s.area_m) << "\n"
    << "n_drops = " << s.n_drops << "\n"
    << "master_seed = " << s.master_seed << "\n"
    << "mimo = " << s.mimo << "\n"
    << "mode = " << sim::to_string(s.mode) << "\n"
    << "antenna_spacing_wl = " << d(s.antenna_spacing_wl) << "\n"
    << "single_cell = " << (s.single_cell ? "true" : "false") << "\n\n";
  o << "[shaping]\n"
    << "symbol_period = " << d(s.shaping.symbol_period) << "\n"
    << "m_len = " << s.shaping.m_len << "\n"
    << "tx_oversampling = " << s.shaping.tx_oversampling << "\n"
    << "rx_oversampling = " << s.shaping.rx_oversampling << "\n"
    << "reference_symbol = " << s.shaping.reference_symbol << "\n"
    << "delays = ";
  if (s.delays) {
    for (std::size_t i = 0; i < s.delays->size(); ++i) o << (i ? ", " : "") << d((*s.delays)[i]);
  } else {
    o << "optimize";
  }
  o << "\n\n";
  o << "[search]\n"
    << "grid_points_per_dim = " << s.search.grid_points_per_dim << "\n"
    << "epsilon = " << d(s.search.epsilon) << "\n"
    << "ensemble_size = " << s.search.ensemble_size << "\n"
    << "metric = " << optim::to_string(s.search.metric) << "\n"
    << "max_delay = " << (s.search.max_delay ? d(*s.search.max_delay) : std::string("auto")) << "\n"
    << "evaluation_budget = " << s.search.evaluation_budget << "\n"
    << "ensemble_distance_m = " << d(s.search.ensemble_distance_m) << "\n\n";
  o << "[radio]\n"
    << "carrier_ghz = " << d(s.carrier_ghz) << "\n"
    << "bandwidth_hz = " << d(s.bandwidth_hz) << "\n"
    << "bs_power_dbm = " << d(s.bs_power_dbm) << "\n"
    << "noise_figure_db = " << d(s.noise_figure_db) << "\n"
    << "shadowing_sigma_los_db = " << d(s.shadowing_sigma_los_db) << "\n"
    << "shadowing_sigma_nlos_db = " << d(s.shadowing_sigma_nlos_db) << "\n"
    << "spectral_efficiency_cap = "
    << (s.spectral_efficiency_cap ? d(*s.spectral_efficiency_cap) : std::string("none")) << "\n"
    << "pl_los_slope = " << d(s.pathloss.los_slope) << "\n"
    << "pl_los_intercept = " << d(s.pathloss.los_intercept) << "\n"
    << "pl_los_freq_slope = " << d(s.pathloss.los_freq_slope) << "\n"
    << "pl_nlos_slope = " << d(s.pathloss.nlos_slope) << "\n"
    << "pl_nlos_intercept = " << d(s.pathloss.nlos_intercept) << "\n"
    << "pl_nlos_freq_slope = " << d(s.pathloss.nlos_freq_slope) << "\n"
    << "los_breakpoint_m = " << d(s.pathloss.los_breakpoint_m) << "\n"
    << "los_decay_m = " << d(s.pathloss.los_decay_m) << "\n";
  return o.str();
}

}  // namespace dpst::cli
