// SPDX-License-Identifier: Apache-2.0
#include "dpst/system_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "dpst/channel_model.hpp"
#include "dpst/error.hpp"
#include "dpst/linalg.hpp"
#include "dpst/parallel.hpp"
#include "dpst/rng.hpp"
#include "dpst/transceiver.hpp"

namespace dpst::sim {

std::string_view to_string(SimMode m) noexcept {
  switch (m) {
    case SimMode::Correlated:
      return "correlated";
    case SimMode::Rayleigh:
      return "rayleigh";
    case SimMode::Dpst:
      return "dpst";
    case SimMode::Optimum:
      return "optimum";
  }
  return "unknown";
}

std::optional<SimMode> parse_sim_mode(std::string_view s) noexcept {
  for (SimMode m : {SimMode::Correlated, SimMode::Rayleigh, SimMode::Dpst, SimMode::Optimum})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  const auto positive = [](double v, const char *key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be positive");
  };
  const auto non_negative = [](double v, const char *key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be non-negative");
  };
  positive(isd_m, "scenario.isd_m");
  positive(area_m, "scenario.area_m");
  if (n_drops == 0) throw ConfigError("scenario.n_drops", "must be at least 1");
  if (mimo != 2 && mimo != 4) throw ConfigError("scenario.mimo", "must be 2 or 4");
  non_negative(antenna_spacing_wl, "scenario.antenna_spacing_wl");
  positive(carrier_ghz, "radio.carrier_ghz");
  positive(bandwidth_hz, "radio.bandwidth_hz");
  if (!std::isfinite(bs_power_dbm)) throw ConfigError("radio.bs_power_dbm", "must be finite");
  if (!std::isfinite(noise_figure_db)) throw ConfigError("radio.noise_figure_db", "must be finite");
  non_negative(shadowing_sigma_los_db, "radio.shadowing_sigma_los_db");
  non_negative(shadowing_sigma_nlos_db, "radio.shadowing_sigma_nlos_db");
  positive(pathloss.los_breakpoint_m, "radio.los_breakpoint_m");
  positive(pathloss.los_decay_m, "radio.los_decay_m");
  if (spectral_efficiency_cap) positive(*spectral_efficiency_cap, "radio.spectral_efficiency_cap");

  shaping::ShapingConfig s = shaping;
  if (delays) s.delays = *delays;
  try {
    s.validate(mimo);
  } catch (const std::invalid_argument &e) {
    throw ConfigError(delays ? "shaping.delays" : "shaping", e.what());
  }
  search.validate(shaping.symbol_period);
}

CdfSeries::CdfSeries(std::vector<double> values, std::string metric_name)
    : values_(std::move(values)), name_(std::move(metric_name)) {
  std::sort(values_.begin(), values_.end());
}

double CdfSeries::percentile(double p) const {
  if (values_.empty()) throw std::invalid_argument("CdfSeries::percentile: empty series");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("CdfSeries::percentile: p outside [0, 100]");
  const double pos = p / 100.0 * static_cast<double>(values_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values_.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values_[lo];
  return values_[lo] + frac * (values_[hi] - values_[lo]);
}

double CdfSeries::cumulative_probability(std::size_t i) const {
  return static_cast<double>(i + 1) / static_cast<double>(values_.size());
}

std::array<Point, 7> hex_layout(double isd_m) {
  if (!(isd_m > 0.0)) throw std::invalid_argument("hex_layout: isd must be positive");
  std::array<Point, 7> sites{};
  for (std::size_t k = 1; k < 7; ++k) {
    const double a = static_cast<double>(k - 1) * std::numbers::pi / 3.0;
    sites[k] = {isd_m * std::cos(a), isd_m * std::sin(a)};
  }
  return sites;
}

bool in_serving_cell(Point p, double isd_m) noexcept {
  // Cell edges are the perpendicular bisectors towards the six neighbours.
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    if (p.x * std::cos(a) + p.y * std::sin(a) > 0.5 * isd_m) return false;
  }
  return true;
}

double los_probability(double d_m, const PathLossModel &model) {
  if (!(d_m > 0.0)) throw std::invalid_argument("los_probability: distance must be positive");
  const double e = std::exp(-d_m / model.los_decay_m);
  return std::min(model.los_breakpoint_m / d_m, 1.0) * (1.0 - e) + e;
}

namespace {
std::atomic<std::uint64_t> g_clamps{0};
}

double pathloss_db(double d_m, bool los, double carrier_ghz, const PathLossModel &model) {
  if (!(carrier_ghz > 0.0)) throw std::invalid_argument("pathloss_db: carrier must be positive");
  if (!(d_m >= 1.0)) {
    if (g_clamps.fetch_add(1, std::memory_order_relaxed) == 0)
      std::fprintf(stderr, "warning: link distance %.3g m below 1 m, clamped to 1 m\n", d_m);
    d_m = 1.0;
  }
  const double lf = std::log10(carrier_ghz);
  if (los) return model.los_slope * std::log10(d_m) + model.los_intercept + model.los_freq_slope * lf;
  return model.nlos_slope * std::log10(d_m) + model.nlos_intercept + model.nlos_freq_slope * lf;
}

std::uint64_t pathloss_clamp_count() noexcept { return g_clamps.load(std::memory_order_relaxed); }

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) noexcept {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

std::vector<double> resolve_delays(const ScenarioConfig &scenario, std::size_t threads,
                                   optim::DelaySearchResult *search_out) {
  if (scenario.delays) return *scenario.delays;
  optim::EnsembleSpec spec;
  spec.n_tx = spec.n_rx = scenario.mimo;
  spec.size = scenario.search.ensemble_size;
  spec.distance_m = scenario.search.ensemble_distance_m;
  spec.spacing_wl = scenario.antenna_spacing_wl;
  spec.mode = channel::ChannelMode::Correlated;
  // Kept apart from the drop streams, which use master_seed directly.
  spec.seed = mix64(scenario.master_seed ^ 0x6f70742d64656c61ULL);
  auto res = optim::optimize_delays(optim::make_ensemble(spec), scenario.search, scenario.shaping, threads);
  auto delays = res.delays;
  if (search_out) *search_out = std::move(res);
  return delays;
}

namespace {

struct DropContext {
  channel::ChannelGenerator gen;
  std::optional<shaping::ShapingPlan> plan;
  double tx_power_mw;
  double noise_mw;
};

DropContext make_context(const ScenarioConfig &sc) {
  DropContext ctx{channel::ChannelGenerator(sc.mimo, sc.mimo, sc.antenna_spacing_wl, sc.antenna_spacing_wl),
                  std::nullopt, std::pow(10.0, sc.bs_power_dbm / 10.0),
                  std::pow(10.0, noise_power_dbm(sc.bandwidth_hz, sc.noise_figure_db) / 10.0)};
  if (sc.mode == SimMode::Dpst) {
    if (!sc.delays) throw std::invalid_argument("run_drop: DPST drops need resolved delays");
    shaping::ShapingConfig s = sc.shaping;
    s.delays = *sc.delays;
    ctx.plan.emplace(s, sc.mimo);
  }
  return ctx;
}

channel::ChannelMode serving_mode(SimMode m) {
  switch (m) {
    case SimMode::Rayleigh:
      return channel::ChannelMode::Rayleigh;
    case SimMode::Optimum:
      return channel::ChannelMode::Optimum;
    default:
      return channel::ChannelMode::Correlated;
  }
}

DropResult drop_with(const ScenarioConfig &sc, std::uint64_t drop_index, const DropContext &ctx) {
  Rng rng(sc.master_seed, drop_index);
  const auto sites = hex_layout(sc.isd_m);

  DropResult out;
  const double radius = sc.isd_m / std::sqrt(3.0);
  do {
    out.ue_position.x = rng.uniform(-radius, radius);
    out.ue_position.y = rng.uniform(-radius, radius);
  } while (!in_serving_cell(out.ue_position, sc.isd_m));

  const std::size_t n_sites = sc.single_cell ? 1 : sites.size();
  std::array<double, 7> gain{};
  std::array<double, 7> dist{};
  for (std::size_t k = 0; k < n_sites; ++k) {
    dist[k] = std::hypot(out.ue_position.x - sites[k].x, out.ue_position.y - sites[k].y);
    const double d = std::max(dist[k], 1.0);
    const bool los = rng.uniform() < los_probability(d, sc.pathloss);
    const double sigma = los ? sc.shadowing_sigma_los_db : sc.shadowing_sigma_nlos_db;
    const double shadow = sigma * rng.normal();
    gain[k] = std::pow(10.0, (shadow - pathloss_db(dist[k], los, sc.carrier_ghz, sc.pathloss)) / 10.0);
  }
  out.serving_distance_m = dist[0];

  Rng serving_rng = rng.substream(0);
  const ComplexMatrix h = ctx.gen.draw(std::max(dist[0], 1.0), serving_mode(sc.mode), serving_rng).h;
  const ComplexMatrix h_n = ctx.plan ? ctx.plan->virtual_channel(h).h_n : h;
  out.condition_number = condition_number(h_n);

  const std::size_t n_r = sc.mimo;
  ComplexMatrix phi(n_r, n_r);
  const auto interferer_mode =
      sc.mode == SimMode::Rayleigh ? channel::ChannelMode::Rayleigh : channel::ChannelMode::Correlated;
  for (std::size_t k = 1; k < n_sites; ++k) {
    Rng irng = rng.substream(k);
    const ComplexMatrix g = ctx.gen.draw(std::max(dist[k], 1.0), interferer_mode, irng).h;
    phi += cplx(ctx.tx_power_mw * gain[k] / static_cast<double>(sc.mimo)) * (g * g.adjoint());
  }

  const ComplexMatrix w = link::precoder(h_n, ctx.tx_power_mw);
  const ComplexMatrix h_eq = cplx(std::sqrt(gain[0])) * (h_n * w);
  const ComplexMatrix f = link::mmse_filter(h_eq, phi, ctx.noise_mw);
  const auto sinr = link::stream_sinr(f, h_eq, phi, ctx.noise_mw);

  out.serving_sinr_db.reserve(sinr.size());
  for (double z : sinr) out.serving_sinr_db.push_back(10.0 * std::log10(z));
  out.effective_sinr_db = 10.0 * std::log10(link::effective_sinr(sinr));
  out.throughput_bps = link::throughput(sinr, sc.bandwidth_hz, sc.spectral_efficiency_cap);
  return out;
}

}  // namespace

DropResult run_drop(const ScenarioConfig &scenario, std::uint64_t drop_index) {
  scenario.validate();
  return drop_with(scenario, drop_index, make_context(scenario));
}

std::vector<DropResult> run_drops(const ScenarioConfig &scenario, std::size_t threads) {
  scenario.validate();
  const DropContext ctx = make_context(scenario);
  std::vector<DropResult> out(scenario.n_drops);
  parallel_for(scenario.n_drops, threads, [&](std::size_t i) { out[i] = drop_with(scenario, i, ctx); });
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig &scenario, std::size_t threads) {
  scenario.validate();
  ScenarioResult res;
  ScenarioConfig resolved = scenario;
  if (scenario.mode == SimMode::Dpst) {
    optim::DelaySearchResult search;
    res.delays = resolve_delays(scenario, threads, &search);
    if (!scenario.delays) res.search = std::move(search);
    resolved.delays = res.delays;
  }
  res.drops = run_drops(resolved, threads);

  std::vector<double> sinr, tput, cond;
  sinr.reserve(res.drops.size());
  tput.reserve(res.drops.size());
  cond.reserve(res.drops.size());
  for (const auto &d : res.drops) {
    sinr.push_back(d.effective_sinr_db);
    tput.push_back(d.throughput_bps);
    cond.push_back(d.condition_number);
  }
  res.cdfs.emplace("sinr", CdfSeries(std::move(sinr), "effective_sinr_db"));
  res.cdfs.emplace("throughput", CdfSeries(std::move(tput), "throughput_bps"));
  res.cdfs.emplace("condnum", CdfSeries(std::move(cond), "condition_number"));
  return res;
}

ChannelStats channel_statistics(const ScenarioConfig &scenario, SimMode mode, std::span<const double> delays,
                                std::size_t threads) {
  scenario.validate();
  optim::EnsembleSpec spec;
  spec.n_tx = spec.n_rx = scenario.mimo;
  spec.size = scenario.n_drops;
  spec.distance_m = scenario.search.ensemble_distance_m;
  spec.spacing_wl = scenario.antenna_spacing_wl;
  spec.mode = serving_mode(mode);
  spec.seed = mix64(scenario.master_seed ^ 0x6368616e2d737461ULL);
  const auto ensemble = optim::make_ensemble(spec);

  std::optional<shaping::ShapingPlan> plan;
  if (mode == SimMode::Dpst) {
    shaping::ShapingConfig s = scenario.shaping;
    s.delays.assign(delays.begin(), delays.end());
    plan.emplace(s, scenario.mimo);
  }
  std::vector<double> rank(spec.size), cond(spec.size);
  parallel_for(spec.size, threads, [&](std::size_t i) {
    const ComplexMatrix &h = ensemble.channels[i];
    const ComplexMatrix h_n = plan ? plan->virtual_channel(h).h_n : h;
    const auto sigma = singular_values(h_n);
    cond[i] = condition_number_from_sigma(sigma);
    rank[i] = static_cast<double>(numerical_rank(h_n));
  });
  ChannelStats out;
  out.draws = spec.size;
  for (std::size_t i = 0; i < spec.size; ++i) {
    out.mean_rank += rank[i];
    out.mean_condition += cond[i];
  }
  out.mean_rank /= static_cast<double>(spec.size);
  out.mean_condition /= static_cast<double>(spec.size);
  return out;
}

}  // namespace dpst::sim
