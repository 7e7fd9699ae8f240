// SPDX-License-Identifier: Apache-2.0
#include "dpst/transceiver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpst/kernels.hpp"
#include "dpst/linalg.hpp"

namespace dpst::link {

void LinkState::validate() const {
  if (!(noise_power > 0.0)) throw std::invalid_argument("LinkState: noise_power must be positive");
  if (!(tx_power > 0.0)) throw std::invalid_argument("LinkState: tx_power must be positive");
  if (!phi.is_square()) throw std::invalid_argument("LinkState: phi must be square");
  if (hermitian_defect(phi) > 1e-12) throw std::invalid_argument("LinkState: phi is not Hermitian");
  if (!phi.empty() && hermitian_eigenvalues(phi).front() < -1e-10)
    throw std::invalid_argument("LinkState: phi is not positive semidefinite");
  const double pw = std::pow(frobenius_norm(w), 2);
  if (std::abs(pw - tx_power) > 1e-9 * tx_power)
    throw std::invalid_argument("LinkState: precoder power " + std::to_string(pw) + " != " + std::to_string(tx_power));
}

ComplexMatrix precoder(const ComplexMatrix &h_n, double tx_power) {
  if (h_n.empty()) throw std::invalid_argument("precoder: empty channel");
  if (!(tx_power > 0.0)) throw std::invalid_argument("precoder: tx_power must be positive");
  if (frobenius_norm(h_n) == 0.0) throw std::invalid_argument("precoder: zero channel");
  const std::size_t l = std::min(h_n.rows(), h_n.cols());
  const SvdResult d = svd(h_n);
  ComplexMatrix w = d.v.block(0, 0, d.v.rows(), l);
  w *= cplx(std::sqrt(tx_power) / frobenius_norm(w));
  return w;
}

ComplexMatrix mmse_filter(const ComplexMatrix &h_eq, const ComplexMatrix &phi, double noise_power) {
  if (h_eq.empty()) throw std::invalid_argument("mmse_filter: empty channel");
  if (phi.rows() != h_eq.rows() || phi.cols() != h_eq.rows())
    throw std::invalid_argument("mmse_filter: phi must be " + std::to_string(h_eq.rows()) + "x" +
                                std::to_string(h_eq.rows()));
  if (!(noise_power >= 0.0)) throw std::invalid_argument("mmse_filter: negative noise power");
  ComplexMatrix a = h_eq * h_eq.adjoint();
  a += phi;
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += noise_power;
  // a is Hermitian, so h^H a^-1 = (a^-1 h)^H.
  return solve(a, h_eq).adjoint();
}

std::vector<double> stream_sinr(const ComplexMatrix &f, const ComplexMatrix &h_eq, const ComplexMatrix &phi,
                                double noise_power) {
  if (f.cols() != h_eq.rows() || f.rows() != h_eq.cols())
    throw std::invalid_argument("stream_sinr: filter and channel dimensions disagree");
  if (phi.rows() != h_eq.rows() || phi.cols() != h_eq.rows())
    throw std::invalid_argument("stream_sinr: phi dimension mismatch");
  const auto &kern = kernels::active();
  const ComplexMatrix fh = f * h_eq;
  const ComplexMatrix fphi = f * phi;
  std::vector<double> out(f.rows());
  for (std::size_t l = 0; l < f.rows(); ++l) {
    const auto fl = f.row(l);
    const double signal = std::norm(fh(l, l));
    if (signal == 0.0) {
      out[l] = 0.0;
      continue;
    }
    double leak = 0.0;
    for (std::size_t k = 0; k < fh.cols(); ++k)
      if (k != l) leak += std::norm(fh(l, k));
    // f_l phi f_l^H, with f_l a row: sum_j (f_l phi)_j conj(f_l)_j
    const double interference = kern.dot_conj(fl.data(), fphi.row(l).data(), fl.size()).real();
    const double noise = noise_power * kern.norm_sq(fl.data(), fl.size());
    out[l] = signal / (leak + std::max(interference, 0.0) + noise);
  }
  return out;
}

std::vector<cplx> detect(const ComplexMatrix &f, const ComplexMatrix &u_trunc, const ComplexMatrix &h_os,
                         std::span<const cplx> s, double gain) {
  if (s.size() != h_os.cols()) throw std::invalid_argument("detect: symbol vector length mismatch");
  if (u_trunc.rows() != h_os.rows()) throw std::invalid_argument("detect: u_trunc rows mismatch");
  if (f.cols() != u_trunc.cols()) throw std::invalid_argument("detect: filter columns mismatch");
  const std::vector<cplx> r = h_os * s;
  std::vector<cplx> y = u_trunc.adjoint() * std::span<const cplx>(r);
  for (auto &v : y) v *= gain;
  return f * std::span<const cplx>(y);
}

double throughput(std::span<const double> sinrs, double bandwidth_hz, std::optional<double> cap_bps_per_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("throughput: bandwidth must be positive");
  double se = 0.0;
  for (double z : sinrs) {
    if (!(z >= 0.0)) throw std::invalid_argument("throughput: negative SINR");
    double c = std::log2(1.0 + z);
    if (cap_bps_per_hz) c = std::min(c, *cap_bps_per_hz);
    se += c;
  }
  return bandwidth_hz * se;
}

double effective_sinr(std::span<const double> sinrs) {
  if (sinrs.empty()) return 0.0;
  double c = 0.0;
  for (double z : sinrs) c += std::log2(1.0 + z);
  return std::exp2(c / static_cast<double>(sinrs.size())) - 1.0;
}

}  // namespace dpst::link
