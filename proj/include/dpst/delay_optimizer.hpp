// SPDX-License-Identifier: Apache-2.0
//
// Grid search for per-antenna fractional delays that decorrelate the
// transmit channels, scored on a fixed seeded ensemble of channel draws.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dpst/channel_model.hpp"
#include "dpst/complex_matrix.hpp"
#include "dpst/pulse_shaping.hpp"

namespace dpst::optim {

enum class SearchMetric { CovarianceDiagonalization, ConditionNumber };

std::string_view to_string(SearchMetric m) noexcept;

struct DelaySearchConfig {
  std::size_t grid_points_per_dim = 100;
  double epsilon = 0.3;
  std::size_t ensemble_size = 200;
  SearchMetric metric = SearchMetric::ConditionNumber;
  /// Exclusive upper end of the searched delays; symbol period when unset.
  std::optional<double> max_delay;
  /// Cap on candidate evaluations (coarse grid plus refinement).
  std::size_t evaluation_budget = 200000;
  /// Link distance of the ensemble draws.
  double ensemble_distance_m = 10.0;

  double effective_max_delay(double symbol_period) const { return max_delay ? *max_delay : symbol_period; }
  void validate(double symbol_period) const;

  bool operator==(const DelaySearchConfig &) const = default;
};

/// Grid delays g * max_delay / (G + 1), g = 1..G.
std::vector<double> delay_grid(const DelaySearchConfig &search, double symbol_period);

struct EnsembleSpec {
  std::size_t n_tx = 2;
  std::size_t n_rx = 2;
  std::size_t size = 200;
  double distance_m = 10.0;
  double spacing_wl = 0.5;
  channel::ChannelMode mode = channel::ChannelMode::Correlated;
  std::uint64_t seed = 1;
};

/// Draw i comes from Rng(seed, i), so every candidate delay set is scored
/// on the same channels.
struct ChannelEnsemble {
  std::vector<ComplexMatrix> channels;
  std::size_t n_tx() const { return channels.empty() ? 0 : channels.front().cols(); }
  std::size_t n_rx() const { return channels.empty() ? 0 : channels.front().rows(); }
};

ChannelEnsemble make_ensemble(const EnsembleSpec &spec);

/// Gram matrix of the transmit-shaped channel: block (u, v) equals
/// (h_u^H h_v) * I(tau_u)^T I(tau_v), size (N_t M) x (N_t M).
ComplexMatrix shaped_channel_covariance(const ComplexMatrix &h, std::span<const double> delays,
                                        const shaping::ShapingConfig &cfg);

/// |D^-1/2 R D^-1/2 - I|_F with D = diag(R).
double diagonalization_objective(const ComplexMatrix &r_x);

/// Condition number of the virtual channel for the given delays.
double condition_metric(const ComplexMatrix &h, std::span<const double> delays, const shaping::ShapingConfig &cfg);

/// Mean over the ensemble of the virtual-channel singular values, each draw
/// scaled to unit RMS singular value.
std::vector<double> mean_normalized_singular_values(const ChannelEnsemble &ensemble, std::span<const double> delays,
                                                    const shaping::ShapingConfig &cfg);

/// Scores delay candidates drawn from a grid. Index 0 is delay 0, index g
/// is grid()[g]. The per-draw work uses precomputed pulse cross products,
/// so the condition metric costs one N_t x N_t eigenproblem per draw and
/// the diagonalization metric touches only the transmit side.
class DelayEvaluator {
 public:
  DelayEvaluator(const ChannelEnsemble &ensemble, const DelaySearchConfig &search, const shaping::ShapingConfig &cfg);

  const std::vector<double> &grid() const noexcept { return grid_; }
  std::size_t n_tx() const noexcept { return n_tx_; }

  /// Ensemble mean of the metric; indices has one entry per transmit
  /// antenna and indices[0] must be 0.
  double evaluate(std::span<const std::size_t> indices) const;
  double evaluate_draw(std::size_t draw, std::span<const std::size_t> indices) const;

 private:
  SearchMetric metric_;
  std::size_t n_tx_ = 0;
  std::size_t n_rx_ = 0;
  std::size_t m_len_ = 0;
  std::vector<double> grid_;
  std::size_t stride_ = 0;           // grid_.size()
  std::vector<double> pair_table_;   // stride_ x stride_
  std::vector<ComplexMatrix> grams_; // H^H H per draw (condition metric)
  std::vector<std::vector<double>> coherence_;  // |rho_uv|^2 per draw (diagonalization)
};

struct TracePoint {
  std::vector<double> delays;
  double value = 0.0;
  bool refinement = false;
};

struct DelaySearchResult {
  std::vector<double> delays;
  double objective_value = 0.0;
  std::vector<TracePoint> metric_trace;
  std::size_t coarse_points_per_dim = 0;
  std::vector<double> mean_normalized_sigma;
  bool within_epsilon = false;
};

/// Exhaustive scan for two transmit antennas; for more, a coarse grid over
/// all free delays followed by one full-resolution pass per coordinate.
/// Ties go to the smaller delay tuple. Results do not depend on `threads`.
DelaySearchResult optimize_delays(const ChannelEnsemble &ensemble, const DelaySearchConfig &search,
                                  const shaping::ShapingConfig &cfg, std::size_t threads = 1);

}  // namespace dpst::optim
