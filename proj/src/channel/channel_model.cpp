// SPDX-License-Identifier: Apache-2.0
#include "dpst/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dpst/error.hpp"
#include "dpst/linalg.hpp"
#include "dpst/special.hpp"

namespace dpst::channel {

std::string_view to_string(ChannelMode m) noexcept {
  switch (m) {
    case ChannelMode::Correlated:
      return "correlated";
    case ChannelMode::Rayleigh:
      return "rayleigh";
    case ChannelMode::Optimum:
      return "optimum";
  }
  return "unknown";
}

void ChannelParams::validate() const {
  if (n_tx == 0 || n_rx == 0) throw std::invalid_argument("ChannelParams: antenna counts must be positive");
  if (!(distance_m > 0.0)) throw std::invalid_argument("ChannelParams: distance_m must be positive");
  if (!(tx_spacing_wl >= 0.0) || !(rx_spacing_wl >= 0.0))
    throw std::invalid_argument("ChannelParams: antenna spacing must be non-negative");
  if (k_factor_override && !(*k_factor_override >= 0.0))
    throw std::invalid_argument("ChannelParams: K factor override must be non-negative");
}

double rician_k(double distance_m) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("rician_k: distance must be positive");
  if (distance_m < 18.0) return 32.0;
  return 140.10 * std::exp(-0.107 * distance_m);
}

double spatial_correlation(std::size_t i, std::size_t j, std::size_t p, std::size_t q, double tx_spacing_wl,
                           double rx_spacing_wl) {
  const auto gap = [](std::size_t a, std::size_t b) { return static_cast<double>(a > b ? a - b : b - a); };
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return bessel_j0(two_pi * tx_spacing_wl * gap(q, j)) * bessel_j0(two_pi * rx_spacing_wl * gap(p, i));
}

namespace {

ComplexMatrix one_sided_correlation(std::size_t n, double spacing_wl) {
  ComplexMatrix r(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) r(a, b) = spatial_correlation(0, a, 0, b, spacing_wl, 0.0);
  return r;
}

void require_psd(const ComplexMatrix &r, const char *side) {
  const auto ev = hermitian_eigenvalues(r);
  if (ev.front() < -1e-10)
    throw ModelError(std::string(side) + " correlation matrix is not PSD (min eigenvalue " +
                     std::to_string(ev.front()) + ")");
}

}  // namespace

CorrelationMatrices build_correlation_matrices(const ChannelParams &params) {
  params.validate();
  CorrelationMatrices out{one_sided_correlation(params.n_tx, params.tx_spacing_wl),
                          one_sided_correlation(params.n_rx, params.rx_spacing_wl)};
  require_psd(out.r_tx, "transmit");
  require_psd(out.r_rx, "receive");
  return out;
}

ComplexMatrix sample_white_channel(std::size_t n_rx, std::size_t n_tx, Rng &rng) {
  ComplexMatrix h(n_rx, n_tx);
  for (auto &z : h.entries()) z = rng.complex_normal();
  return h;
}

ChannelGenerator::ChannelGenerator(std::size_t n_tx, std::size_t n_rx, double tx_spacing_wl, double rx_spacing_wl) {
  base_.n_tx = n_tx;
  base_.n_rx = n_rx;
  base_.tx_spacing_wl = tx_spacing_wl;
  base_.rx_spacing_wl = rx_spacing_wl;
  corr_ = build_correlation_matrices(base_);
  sqrt_tx_ = psd_sqrt(corr_.r_tx);
  sqrt_rx_ = psd_sqrt(corr_.r_rx);
}

ChannelRealization ChannelGenerator::draw(double distance_m, ChannelMode mode, Rng &rng,
                                          std::optional<double> k_factor_override) const {
  ChannelRealization out;
  out.params = base_;
  out.params.distance_m = distance_m;
  out.params.mode = mode;
  out.params.k_factor_override = k_factor_override;
  out.params.validate();
  out.r_tx = corr_.r_tx;
  out.r_rx = corr_.r_rx;
  out.seed = rng.master_seed();
  out.stream = rng.stream();

  ComplexMatrix hw = sample_white_channel(base_.n_rx, base_.n_tx, rng);
  if (mode == ChannelMode::Rayleigh) {
    out.k_factor = 0.0;
    out.h = std::move(hw);
    return out;
  }

  const double k = k_factor_override ? *k_factor_override : rician_k(distance_m);
  out.k_factor = k;
  const double los_amp = std::sqrt(k / (k + 1.0));
  const double nlos_amp = std::sqrt(1.0 / (k + 1.0));
  ComplexMatrix h = nlos_amp * (sqrt_rx_ * hw * sqrt_tx_);
  if (los_amp > 0.0) h += los_amp * ComplexMatrix::ones(base_.n_rx, base_.n_tx);

  if (mode == ChannelMode::Optimum) {
    const SvdResult d = svd(h);
    const std::size_t l = std::min(base_.n_rx, base_.n_tx);
    const double level = frobenius_norm(h) / std::sqrt(static_cast<double>(l));
    const std::vector<double> flat(l, level);
    h = d.u * ComplexMatrix::diagonal(flat, base_.n_rx, base_.n_tx) * d.v.adjoint();
  }
  out.h = std::move(h);
  return out;
}

ChannelRealization assemble_channel(const ChannelParams &params, Rng &rng) {
  params.validate();
  const ChannelGenerator gen(params.n_tx, params.n_rx, params.tx_spacing_wl, params.rx_spacing_wl);
  return gen.draw(params.distance_m, params.mode, rng, params.k_factor_override);
}

std::pair<double, double> sv_approx_2x2(const ComplexMatrix &h) {
  if (h.rows() != 2 || h.cols() != 2) throw std::invalid_argument("sv_approx_2x2: expects a 2x2 matrix");
  const double fro2 = std::norm(h(0, 0)) + std::norm(h(0, 1)) + std::norm(h(1, 0)) + std::norm(h(1, 1));
  if (fro2 == 0.0) throw std::invalid_argument("sv_approx_2x2: zero channel");
  const double lambda2 = std::norm(h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)) / fro2;
  return {fro2 - lambda2, lambda2};
}

double capacity(const ComplexMatrix &h, double snr_linear) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("capacity: snr must be positive");
  const auto sigma = singular_values(h);
  const double l = static_cast<double>(std::min(h.rows(), h.cols()));
  double c = 0.0;
  for (double s : sigma) c += std::log2(1.0 + snr_linear * s * s / l);
  return c;
}

double capacity_logdet(const ComplexMatrix &h, double snr_linear) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("capacity_logdet: snr must be positive");
  const double l = static_cast<double>(std::min(h.rows(), h.cols()));
  ComplexMatrix g = h * h.adjoint();
  g *= cplx(snr_linear / l);
  g += ComplexMatrix::identity(h.rows());
  return log2_det_hpd(g);
}

}  // namespace dpst::channel
