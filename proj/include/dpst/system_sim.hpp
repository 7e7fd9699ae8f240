// SPDX-License-Identifier: Apache-2.0
//
// Seven-cell hexagonal downlink Monte-Carlo. One UE in the central cell is
// served by the central site while the six surrounding sites interfere.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpst/delay_optimizer.hpp"
#include "dpst/pulse_shaping.hpp"

namespace dpst::sim {

enum class SimMode { Correlated, Rayleigh, Dpst, Optimum };

std::string_view to_string(SimMode m) noexcept;
std::optional<SimMode> parse_sim_mode(std::string_view s) noexcept;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point &) const = default;
};

/// Urban-micro path-loss and LOS-probability coefficients.
struct PathLossModel {
  double los_slope = 22.0;
  double los_intercept = 28.0;
  double los_freq_slope = 20.0;
  double nlos_slope = 36.7;
  double nlos_intercept = 22.7;
  double nlos_freq_slope = 26.0;
  double los_breakpoint_m = 18.0;
  double los_decay_m = 36.0;

  bool operator==(const PathLossModel &) const = default;
};

struct ScenarioConfig {
  double isd_m = 50.0;
  double area_m = 500.0;
  double carrier_ghz = 2.0;
  double bandwidth_hz = 1e7;
  double bs_power_dbm = 24.0;
  double noise_figure_db = 9.0;
  double shadowing_sigma_los_db = 3.0;
  double shadowing_sigma_nlos_db = 4.0;
  std::size_t n_drops = 10000;
  std::uint64_t master_seed = 1;
  std::size_t mimo = 2;
  SimMode mode = SimMode::Correlated;
  double antenna_spacing_wl = 0.5;
  shaping::ShapingConfig shaping;
  /// Explicit per-antenna delays (fractions of the symbol period scale);
  /// unset means "optimize before the first drop".
  std::optional<std::vector<double>> delays;
  optim::DelaySearchConfig search;
  PathLossModel pathloss;
  std::optional<double> spectral_efficiency_cap;
  /// Drops the six interferers (noise-limited single cell).
  bool single_cell = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  bool operator==(const ScenarioConfig &) const = default;
};

struct DropResult {
  Point ue_position;
  double serving_distance_m = 0.0;
  std::vector<double> serving_sinr_db;
  double effective_sinr_db = 0.0;
  double throughput_bps = 0.0;
  double condition_number = 0.0;

  bool operator==(const DropResult &) const = default;
};

class CdfSeries {
 public:
  CdfSeries() = default;
  CdfSeries(std::vector<double> values, std::string metric_name);

  const std::vector<double> &sorted_values() const noexcept { return values_; }
  const std::string &metric_name() const noexcept { return name_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Linear interpolation between order statistics, p in [0, 100].
  double percentile(double p) const;
  /// (i + 1) / n for the i-th sorted value.
  double cumulative_probability(std::size_t i) const;

 private:
  std::vector<double> values_;
  std::string name_;
};

/// Site 0 at the origin, sites 1..6 at distance isd_m and angles 0, 60, ..., 300 degrees.
std::array<Point, 7> hex_layout(double isd_m);

/// True when p lies in the hexagonal cell of apothem isd_m / 2 around the origin.
bool in_serving_cell(Point p, double isd_m) noexcept;

double los_probability(double d_m, const PathLossModel &model = {});

/// Distances below 1 m are clamped to 1 m (warned once per process).
double pathloss_db(double d_m, bool los, double carrier_ghz, const PathLossModel &model = {});
std::uint64_t pathloss_clamp_count() noexcept;

/// Thermal noise over the band plus noise figure, in dBm.
double noise_power_dbm(double bandwidth_hz, double noise_figure_db) noexcept;

/// Resolves scenario.delays: returns it unchanged when explicit, otherwise
/// runs the delay search on the scenario geometry. Also fills `search_out`
/// when a search ran.
std::vector<double> resolve_delays(const ScenarioConfig &scenario, std::size_t threads = 1,
                                   optim::DelaySearchResult *search_out = nullptr);

/// One Monte-Carlo drop, a pure function of (scenario, drop_index). DPST
/// drops need explicit delays (see resolve_delays).
DropResult run_drop(const ScenarioConfig &scenario, std::uint64_t drop_index);

std::vector<DropResult> run_drops(const ScenarioConfig &scenario, std::size_t threads = 1);

struct ScenarioResult {
  std::vector<DropResult> drops;
  /// "sinr" (effective SINR, dB), "throughput" (bit/s), "condnum".
  std::map<std::string, CdfSeries> cdfs;
  std::vector<double> delays;
  std::optional<optim::DelaySearchResult> search;
};

ScenarioResult run_scenario(const ScenarioConfig &scenario, std::size_t threads = 1);

struct ChannelStats {
  double mean_rank = 0.0;
  double mean_condition = 0.0;
  std::size_t draws = 0;
};

/// Rank and condition number of scenario.n_drops serving-channel draws at
/// search.ensemble_distance_m, without path loss or interference. For DPST
/// the statistics are those of the virtual channel with `delays`.
ChannelStats channel_statistics(const ScenarioConfig &scenario, SimMode mode, std::span<const double> delays = {},
                                std::size_t threads = 1);

}  // namespace dpst::sim
