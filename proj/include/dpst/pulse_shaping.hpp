// SPDX-License-Identifier: Apache-2.0
//
// Fractional-delay sinc pulse shaping at the transmitter, sinc oversampling
// at the receiver, and the reduction of the resulting composite channel to
// a virtual MIMO channel of the original size.
//
// Index conventions follow the interpolation formulas literally: sample
// indices n = 1..N, symbol indices m = 1..M, receive indices p = 1..P*N.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpst/complex_matrix.hpp"

namespace dpst::shaping {

struct ShapingConfig {
  double symbol_period = 1.0;
  std::size_t m_len = 10;           // M, symbols per shaping window
  std::size_t tx_oversampling = 2;  // R
  std::size_t rx_oversampling = 2;  // P
  /// Per-transmit-antenna delays in [0, symbol_period), first entry 0.
  /// Empty means "all zero".
  std::vector<double> delays;
  /// 1-based symbol whose composite channel is reduced; 0 selects the
  /// centre symbol (M + 1) / 2.
  std::size_t reference_symbol = 0;

  std::size_t n_samples() const noexcept { return m_len * tx_oversampling; }
  std::size_t effective_reference_symbol() const noexcept {
    return reference_symbol == 0 ? (m_len + 1) / 2 : reference_symbol;
  }
  /// Delays expanded to n_tx entries (zeros when empty).
  std::vector<double> delays_for(std::size_t n_tx) const;
  /// Throws std::invalid_argument on any violated invariant.
  void validate(std::size_t n_tx) const;

  bool operator==(const ShapingConfig &) const = default;
};

/// N x M transmit interpolation matrix:
///   I(n, m) = sinc((n Ts/N + tau - m Ts/M) / (Ts/M)).
ComplexMatrix tx_interpolation_matrix(std::size_t m_len, std::size_t n_samples, double delay, double symbol_period);

/// (P N) x N receive oversampling matrix:
///   I(p, n) = sinc((p Ts/(P N) - n Ts/N) / (Ts/N)).
ComplexMatrix rx_interpolation_matrix(std::size_t n_samples, std::size_t rx_oversampling, double symbol_period);

/// Number of rx_interpolation_matrix() calls in this process. Lets tests
/// verify that a code path never touches the receive side.
std::uint64_t rx_interpolation_calls() noexcept;

/// Full composite channel I_Rx (H * I_Tx) for a flat-fading H:
/// (N_r P N) x (N_t M), with block (i, j) of the transmit stage equal to
/// h(i, j) * I(tau_j) and the receive stage block-diagonal.
ComplexMatrix composite_channel(const ComplexMatrix &h, const ShapingConfig &cfg);

/// Composite channel seen by one transmitted symbol vector s[k]: the columns
/// of the full composite channel that carry symbol k of every transmit
/// antenna. Result is (N_r P N) x N_t.
ComplexMatrix symbol_channel(const ComplexMatrix &h_os_full, std::size_t n_tx, const ShapingConfig &cfg);

struct Downsized {
  ComplexMatrix h_r;      // L x L, diag(sigma_1..sigma_L)
  ComplexMatrix u_trunc;  // leading L left singular vectors
  ComplexMatrix v_trunc;  // leading L right singular vectors
  std::vector<double> sigma;
};

/// h_r = U(:, 1:L)^H h_os V(:, 1:L).
Downsized downsize(const ComplexMatrix &h_os, std::size_t target_rank);

/// h_r * |h_source|_F / |h_r|_F.
ComplexMatrix normalize_channel(const ComplexMatrix &h_r, const ComplexMatrix &h_source);

struct VirtualChannelResult {
  ComplexMatrix h_os;        // per-symbol composite channel, (N_r P N) x N_t
  ComplexMatrix h_r;         // downsized
  ComplexMatrix h_n;         // normalized virtual channel
  ComplexMatrix u_os_trunc;  // retained left singular vectors of h_os
  ComplexMatrix v_os_trunc;  // retained right singular vectors of h_os
  double gain = 1.0;         // |H|_F / |h_r|_F applied by the normalization
};

/// composite_channel -> symbol_channel -> downsize(min(N_r, N_t)) ->
/// normalize_channel, keeping every intermediate.
VirtualChannelResult virtual_channel(const ComplexMatrix &h, const ShapingConfig &cfg);

/// Column `reference_symbol` of I_Rx * I(delay): the oversampled received
/// pulse of one transmitted symbol.
std::vector<double> received_pulse(const ShapingConfig &cfg, double delay);

/// Precomputed received pulses for a fixed delay set. Produces the same
/// per-symbol composite channel as composite_channel() + symbol_channel()
/// without forming the full matrices.
class ShapingPlan {
 public:
  ShapingPlan(const ShapingConfig &cfg, std::size_t n_tx);

  ComplexMatrix symbol_channel(const ComplexMatrix &h) const;
  VirtualChannelResult virtual_channel(const ComplexMatrix &h) const;

  std::size_t n_tx() const noexcept { return pulses_.size(); }
  std::size_t pulse_length() const noexcept { return pulse_len_; }
  std::span<const double> pulse(std::size_t antenna) const { return pulses_.at(antenna); }
  const ShapingConfig &config() const noexcept { return cfg_; }

 private:
  ShapingConfig cfg_;
  std::size_t pulse_len_ = 0;
  std::vector<std::vector<double>> pulses_;
};

}  // namespace dpst::shaping
