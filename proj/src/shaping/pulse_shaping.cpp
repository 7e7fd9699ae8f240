// SPDX-License-Identifier: Apache-2.0
#include "dpst/pulse_shaping.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpst/kernels.hpp"
#include "dpst/linalg.hpp"
#include "dpst/special.hpp"

namespace dpst::shaping {

namespace {

std::atomic<std::uint64_t> g_rx_calls{0};

void check_delay(double delay, double symbol_period) {
  if (!(delay >= 0.0) || !(delay < symbol_period))
    throw std::invalid_argument("fractional delay " + std::to_string(delay) + " outside [0, " +
                                std::to_string(symbol_period) + ")");
}

}  // namespace

std::vector<double> ShapingConfig::delays_for(std::size_t n_tx) const {
  if (delays.empty()) return std::vector<double>(n_tx, 0.0);
  if (delays.size() != n_tx)
    throw std::invalid_argument("ShapingConfig: " + std::to_string(delays.size()) + " delays for " +
                                std::to_string(n_tx) + " transmit antennas");
  return delays;
}

void ShapingConfig::validate(std::size_t n_tx) const {
  if (!(symbol_period > 0.0)) throw std::invalid_argument("ShapingConfig: symbol_period must be positive");
  if (m_len == 0) throw std::invalid_argument("ShapingConfig: m_len must be positive");
  if (tx_oversampling == 0) throw std::invalid_argument("ShapingConfig: tx_oversampling must be positive");
  if (rx_oversampling == 0) throw std::invalid_argument("ShapingConfig: rx_oversampling must be positive");
  if (effective_reference_symbol() > m_len)
    throw std::invalid_argument("ShapingConfig: reference_symbol exceeds m_len");
  const auto d = delays_for(n_tx);
  if (!d.empty() && d.front() != 0.0) throw std::invalid_argument("ShapingConfig: first delay must be 0");
  for (double tau : d) check_delay(tau, symbol_period);
}

ComplexMatrix tx_interpolation_matrix(std::size_t m_len, std::size_t n_samples, double delay, double symbol_period) {
  if (m_len == 0 || n_samples == 0) throw std::invalid_argument("tx_interpolation_matrix: empty dimensions");
  if (!(symbol_period > 0.0)) throw std::invalid_argument("tx_interpolation_matrix: symbol_period must be positive");
  check_delay(delay, symbol_period);
  const double m = static_cast<double>(m_len);
  const double n = static_cast<double>(n_samples);
  const double shift = delay * m / symbol_period;
  ComplexMatrix out(n_samples, m_len);
  // (n Ts/N + tau - m Ts/M) / (Ts/M) = n M / N + tau M / Ts - m
  for (std::size_t row = 1; row <= n_samples; ++row)
    for (std::size_t col = 1; col <= m_len; ++col)
      out(row - 1, col - 1) = sinc(static_cast<double>(row) * m / n + shift - static_cast<double>(col));
  return out;
}

ComplexMatrix rx_interpolation_matrix(std::size_t n_samples, std::size_t rx_oversampling, double symbol_period) {
  g_rx_calls.fetch_add(1, std::memory_order_relaxed);
  if (n_samples == 0 || rx_oversampling == 0) throw std::invalid_argument("rx_interpolation_matrix: empty dimensions");
  if (!(symbol_period > 0.0)) throw std::invalid_argument("rx_interpolation_matrix: symbol_period must be positive");
  const double p_ratio = static_cast<double>(rx_oversampling);
  const std::size_t rows = rx_oversampling * n_samples;
  ComplexMatrix out(rows, n_samples);
  // (p Ts/(P N) - n Ts/N) / (Ts/N) = p / P - n
  for (std::size_t p = 1; p <= rows; ++p)
    for (std::size_t col = 1; col <= n_samples; ++col)
      out(p - 1, col - 1) = sinc(static_cast<double>(p) / p_ratio - static_cast<double>(col));
  return out;
}

std::uint64_t rx_interpolation_calls() noexcept { return g_rx_calls.load(std::memory_order_relaxed); }

ComplexMatrix composite_channel(const ComplexMatrix &h, const ShapingConfig &cfg) {
  if (h.empty()) throw std::invalid_argument("composite_channel: empty channel");
  cfg.validate(h.cols());
  const std::size_t n_rx = h.rows();
  const std::size_t n_tx = h.cols();
  const std::size_t m = cfg.m_len;
  const std::size_t n = cfg.n_samples();
  const auto delays = cfg.delays_for(n_tx);

  std::vector<ComplexMatrix> interp;
  interp.reserve(n_tx);
  for (double tau : delays) interp.push_back(tx_interpolation_matrix(m, n, tau, cfg.symbol_period));

  ComplexMatrix tx_stage(n_rx * n, n_tx * m);
  for (std::size_t i = 0; i < n_rx; ++i)
    for (std::size_t j = 0; j < n_tx; ++j) tx_stage.set_block(i * n, j * m, h(i, j) * interp[j]);

  const ComplexMatrix rx = rx_interpolation_matrix(n, cfg.rx_oversampling, cfg.symbol_period);
  ComplexMatrix rx_stage(n_rx * rx.rows(), n_rx * n);
  for (std::size_t i = 0; i < n_rx; ++i) rx_stage.set_block(i * rx.rows(), i * n, rx);

  return rx_stage * tx_stage;
}

ComplexMatrix symbol_channel(const ComplexMatrix &h_os_full, std::size_t n_tx, const ShapingConfig &cfg) {
  if (n_tx == 0 || h_os_full.cols() != n_tx * cfg.m_len)
    throw std::invalid_argument("symbol_channel: composite channel has " + std::to_string(h_os_full.cols()) +
                                " columns, expected " + std::to_string(n_tx * cfg.m_len));
  const std::size_t k = cfg.effective_reference_symbol();
  if (k == 0 || k > cfg.m_len) throw std::invalid_argument("symbol_channel: reference symbol out of range");
  std::vector<std::size_t> cols(n_tx);
  for (std::size_t j = 0; j < n_tx; ++j) cols[j] = j * cfg.m_len + (k - 1);
  return h_os_full.select_columns(cols);
}

Downsized downsize(const ComplexMatrix &h_os, std::size_t target_rank) {
  if (h_os.empty()) throw std::invalid_argument("downsize: empty matrix");
  if (target_rank == 0 || target_rank > std::min(h_os.rows(), h_os.cols()))
    throw std::invalid_argument("downsize: target rank " + std::to_string(target_rank) + " out of range");
  const SvdResult d = svd_thin(h_os);
  Downsized out;
  out.u_trunc = d.u.block(0, 0, d.u.rows(), target_rank);
  out.v_trunc = d.v.block(0, 0, d.v.rows(), target_rank);
  out.h_r = out.u_trunc.adjoint() * h_os * out.v_trunc;
  out.sigma.assign(d.sigma.begin(), d.sigma.begin() + static_cast<std::ptrdiff_t>(target_rank));
  return out;
}

ComplexMatrix normalize_channel(const ComplexMatrix &h_r, const ComplexMatrix &h_source) {
  const double nr = frobenius_norm(h_r);
  if (nr == 0.0) throw std::invalid_argument("normalize_channel: zero downsized channel");
  return h_r * cplx(frobenius_norm(h_source) / nr);
}

namespace {

VirtualChannelResult finish_virtual(const ComplexMatrix &h, ComplexMatrix h_os) {
  const std::size_t l = std::min(h.rows(), h.cols());
  Downsized d = downsize(h_os, l);
  VirtualChannelResult out;
  out.h_n = normalize_channel(d.h_r, h);
  out.gain = frobenius_norm(h) / frobenius_norm(d.h_r);
  out.h_os = std::move(h_os);
  out.h_r = std::move(d.h_r);
  out.u_os_trunc = std::move(d.u_trunc);
  out.v_os_trunc = std::move(d.v_trunc);
  return out;
}

}  // namespace

VirtualChannelResult virtual_channel(const ComplexMatrix &h, const ShapingConfig &cfg) {
  ComplexMatrix full = composite_channel(h, cfg);
  return finish_virtual(h, symbol_channel(full, h.cols(), cfg));
}

std::vector<double> received_pulse(const ShapingConfig &cfg, double delay) {
  const std::size_t n = cfg.n_samples();
  const std::size_t k = cfg.effective_reference_symbol();
  const ComplexMatrix tx = tx_interpolation_matrix(cfg.m_len, n, delay, cfg.symbol_period);
  const ComplexMatrix rx = rx_interpolation_matrix(n, cfg.rx_oversampling, cfg.symbol_period);
  std::vector<double> col(n);
  for (std::size_t s = 0; s < n; ++s) col[s] = tx(s, k - 1).real();
  std::vector<double> row(n);
  std::vector<double> out(rx.rows());
  const auto &kern = kernels::active();
  for (std::size_t p = 0; p < rx.rows(); ++p) {
    for (std::size_t s = 0; s < n; ++s) row[s] = rx(p, s).real();
    out[p] = kern.dot_real(row.data(), col.data(), n);
  }
  return out;
}

ShapingPlan::ShapingPlan(const ShapingConfig &cfg, std::size_t n_tx) : cfg_(cfg) {
  cfg_.validate(n_tx);
  const auto delays = cfg_.delays_for(n_tx);
  pulses_.reserve(n_tx);
  for (double tau : delays) pulses_.push_back(received_pulse(cfg_, tau));
  pulse_len_ = pulses_.front().size();
}

ComplexMatrix ShapingPlan::symbol_channel(const ComplexMatrix &h) const {
  if (h.cols() != pulses_.size())
    throw std::invalid_argument("ShapingPlan: channel has " + std::to_string(h.cols()) + " transmit antennas, plan has " +
                                std::to_string(pulses_.size()));
  const auto &kern = kernels::active();
  const std::size_t len = pulse_len_;
  // Stored transposed so each (i, j) block is a contiguous run, then
  // transposed back.
  ComplexMatrix t(h.cols(), h.rows() * len);
  for (std::size_t j = 0; j < h.cols(); ++j) {
    cplx *dst = t.row(j).data();
    for (std::size_t i = 0; i < h.rows(); ++i) kern.scale_real(h(i, j), pulses_[j].data(), dst + i * len, len);
  }
  return t.transpose();
}

VirtualChannelResult ShapingPlan::virtual_channel(const ComplexMatrix &h) const {
  return finish_virtual(h, symbol_channel(h));
}

}  // namespace dpst::shaping
