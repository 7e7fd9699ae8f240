// SPDX-License-Identifier: Apache-2.0
#include "dpst/kernels.hpp"

namespace dpst::kernels {
namespace {

cplx dot_conj_scalar(const cplx *x, const cplx *y, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

double norm_sq_scalar(const cplx *x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return acc;
}

void axpy_scalar(cplx a, const cplx *x, cplx *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void rotate_scalar(cplx *x, cplx *y, std::size_t n, double c, cplx s) {
  const cplx sc = std::conj(s);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx xi = x[i];
    const cplx yi = y[i];
    x[i] = c * xi - sc * yi;
    y[i] = s * xi + c * yi;
  }
}

double dot_real_scalar(const double *x, const double *y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void scale_real_scalar(cplx a, const double *x, cplx *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

}  // namespace

const KernelTable &scalar_kernels() noexcept {
  static const KernelTable table{"scalar",       dot_conj_scalar, norm_sq_scalar,   axpy_scalar,
                                 rotate_scalar,  dot_real_scalar, scale_real_scalar};
  return table;
}

}  // namespace dpst::kernels
