// SPDX-License-Identifier: Apache-2.0
//
// Correlated Rician MIMO channel: distance-dependent K factor, Kronecker
// spatial correlation from Bessel-product coefficients, and per-channel
// analytics (2x2 singular-value approximation, capacity).
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "dpst/complex_matrix.hpp"
#include "dpst/rng.hpp"

namespace dpst::channel {

enum class ChannelMode { Correlated, Rayleigh, Optimum };

std::string_view to_string(ChannelMode m) noexcept;

struct ChannelParams {
  std::size_t n_tx = 2;
  std::size_t n_rx = 2;
  double distance_m = 10.0;
  double tx_spacing_wl = 0.5;  // wavelengths
  double rx_spacing_wl = 0.5;  // wavelengths
  ChannelMode mode = ChannelMode::Correlated;
  /// Replaces rician_k(distance_m) when set (limit studies).
  std::optional<double> k_factor_override;

  void validate() const;
};

struct ChannelRealization {
  ComplexMatrix h;  // n_rx x n_tx
  double k_factor = 0.0;
  ComplexMatrix r_tx;
  ComplexMatrix r_rx;
  ChannelParams params;
  std::uint64_t seed = 0;    // master seed of the generating stream
  std::uint64_t stream = 0;  // stream id of the generating stream
};

/// Linear Rician K factor: 32 below 18 m, 140.10 * exp(-0.107 d) otherwise.
/// The step at 18 m is intentional.
double rician_k(double distance_m);

/// Correlation between h(i,j) and h(p,q):
///   J0(2 pi d_t |q - j|) * J0(2 pi d_r |p - i|), spacings in wavelengths.
double spatial_correlation(std::size_t i, std::size_t j, std::size_t p, std::size_t q, double tx_spacing_wl,
                           double rx_spacing_wl);

struct CorrelationMatrices {
  ComplexMatrix r_tx;
  ComplexMatrix r_rx;
};

/// Transmit and receive correlation matrices. Throws ModelError if either
/// has an eigenvalue below -1e-10.
CorrelationMatrices build_correlation_matrices(const ChannelParams &params);

/// n_rx x n_tx i.i.d. CN(0, 1) entries.
ComplexMatrix sample_white_channel(std::size_t n_rx, std::size_t n_tx, Rng &rng);

/// Draws one realization for params.mode:
///  - Correlated: sqrt(K/(K+1)) * 1 + sqrt(1/(K+1)) * R_rx^1/2 H_w R_tx^1/2
///  - Rayleigh:   H_w
///  - Optimum:    U * (|H|_F / sqrt(L)) * I * V^H from the SVD of a
///                Correlated draw (all singular values equal).
ChannelRealization assemble_channel(const ChannelParams &params, Rng &rng);

/// Caches the correlation square roots for a fixed array geometry so that
/// repeated draws (one per link per drop) skip the eigen-decompositions.
/// draw() consumes the rng exactly like assemble_channel().
class ChannelGenerator {
 public:
  ChannelGenerator(std::size_t n_tx, std::size_t n_rx, double tx_spacing_wl, double rx_spacing_wl);

  ChannelRealization draw(double distance_m, ChannelMode mode, Rng &rng,
                          std::optional<double> k_factor_override = std::nullopt) const;

  const CorrelationMatrices &correlation() const noexcept { return corr_; }

 private:
  ChannelParams base_;
  CorrelationMatrices corr_;
  ComplexMatrix sqrt_tx_;
  ComplexMatrix sqrt_rx_;
};

/// Approximate eigenvalues of H H^H for a 2x2 channel:
///   lambda2 = |det H|^2 / |H|_F^2,  lambda1 = |H|_F^2 - lambda2.
std::pair<double, double> sv_approx_2x2(const ComplexMatrix &h);

/// sum_l log2(1 + snr * lambda_l / L), lambda_l the eigenvalues of H H^H and
/// L = min(n_rx, n_tx).
double capacity(const ComplexMatrix &h, double snr_linear);

/// log2 det(I + (snr / L) H H^H); equals capacity() identically.
double capacity_logdet(const ComplexMatrix &h, double snr_linear);

}  // namespace dpst::channel
