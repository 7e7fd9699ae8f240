// SPDX-License-Identifier: Apache-2.0
//
// Linear transceiver on the virtual channel: SVD precoding under a total
// power constraint, MMSE receive filtering against noise plus inter-cell
// interference, per-stream SINR and Shannon throughput.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dpst/complex_matrix.hpp"

namespace dpst::link {

struct LinkState {
  ComplexMatrix h_n;  // virtual channel
  ComplexMatrix w;    // precoder, N_t x L
  ComplexMatrix h_eq; // effective channel seen by the L streams
  ComplexMatrix f;    // MMSE filter, L x N_r
  ComplexMatrix phi;  // interference covariance, Hermitian PSD
  double noise_power = 1.0;
  double tx_power = 1.0;

  /// Throws std::invalid_argument when phi is not Hermitian PSD or the
  /// precoder violates the power constraint.
  void validate() const;
};

/// W = sqrt(tx_power) * V(:, 1:L) / |V(:, 1:L)|_F, L = min(rows, cols).
ComplexMatrix precoder(const ComplexMatrix &h_n, double tx_power);

/// F = H_eq^H (H_eq H_eq^H + phi + N_0 I)^-1.
ComplexMatrix mmse_filter(const ComplexMatrix &h_eq, const ComplexMatrix &phi, double noise_power);

/// Linear SINR of each stream, row l of f estimating stream l:
///   |f_l h_l|^2 / (sum_{k != l} |f_l h_k|^2 + f_l phi f_l^H + N_0 |f_l|^2).
std::vector<double> stream_sinr(const ComplexMatrix &f, const ComplexMatrix &h_eq, const ComplexMatrix &phi,
                                 double noise_power);

/// s_hat = F * (gain * u_trunc^H * h_os * s). `s` is the vector entering
/// h_os; `gain` is the normalization applied to the reduced channel.
std::vector<cplx> detect(const ComplexMatrix &f, const ComplexMatrix &u_trunc, const ComplexMatrix &h_os,
                         std::span<const cplx> s, double gain = 1.0);

/// B * sum_l log2(1 + SINR_l), each stream's spectral efficiency clamped at
/// `cap_bps_per_hz` when given.
double throughput(std::span<const double> sinrs, double bandwidth_hz,
                  std::optional<double> cap_bps_per_hz = std::nullopt);

/// Capacity-equivalent scalar SINR: 2^(sum_l log2(1 + SINR_l) / L) - 1.
double effective_sinr(std::span<const double> sinrs);

}  // namespace dpst::link
