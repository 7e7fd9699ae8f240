// SPDX-License-Identifier: Apache-2.0
//
// AVX2/FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing in here may run before the dispatcher has checked
// the CPU.
#include <immintrin.h>

#include "dpst/kernels.hpp"

namespace dpst::kernels {
namespace {

// Two interleaved complex doubles per register: [re0 im0 re1 im1].

inline __m256d load2(const cplx *p) { return _mm256_loadu_pd(reinterpret_cast<const double *>(p)); }
inline void store2(cplx *p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double *>(p), v); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// a * v for a broadcast complex scalar a = (ar, ai).
inline __m256d cmul(__m256d ar, __m256d ai, __m256d v) {
  const __m256d swapped = _mm256_permute_pd(v, 0b0101);
  return _mm256_fmaddsub_pd(ar, v, _mm256_mul_pd(ai, swapped));
}

cplx dot_conj_avx2(const cplx *x, const cplx *y, std::size_t n) {
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = load2(x + i);
    const __m256d vy = load2(y + i);
    acc_re = _mm256_fmadd_pd(vx, vy, acc_re);
    acc_im = _mm256_fmadd_pd(vx, _mm256_permute_pd(vy, 0b0101), acc_im);
  }
  // acc_im lanes hold [xr*yi, xi*yr, ...]; the imaginary part is their
  // alternating sum.
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(acc_re);
  double im = hsum(_mm256_mul_pd(acc_im, sign));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double norm_sq_avx2(const cplx *x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = load2(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void axpy_avx2(cplx a, const cplx *x, cplx *y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(y + i, _mm256_add_pd(load2(y + i), cmul(ar, ai, load2(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

void rotate_avx2(cplx *x, cplx *y, std::size_t n, double c, cplx s) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d sr = _mm256_set1_pd(s.real());
  const __m256d si = _mm256_set1_pd(s.imag());
  const __m256d sci = _mm256_set1_pd(-s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = load2(x + i);
    const __m256d vy = load2(y + i);
    store2(x + i, _mm256_fmsub_pd(vc, vx, cmul(sr, sci, vy)));
    store2(y + i, _mm256_fmadd_pd(vc, vy, cmul(sr, si, vx)));
  }
  const cplx sc = std::conj(s);
  for (; i < n; ++i) {
    const cplx xi = x[i];
    const cplx yi = y[i];
    x[i] = c * xi - sc * yi;
    y[i] = s * xi + c * yi;
  }
}

double dot_real_avx2(const double *x, const double *y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_real_avx2(cplx a, const double *x, cplx *y, std::size_t n) {
  const __m256d va = _mm256_set_pd(a.imag(), a.real(), a.imag(), a.real());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d pair = _mm256_castpd128_pd256(_mm_loadu_pd(x + i));
    store2(y + i, _mm256_mul_pd(va, _mm256_permute4x64_pd(pair, 0x50)));
  }
  for (; i < n; ++i) y[i] = a * x[i];
}

}  // namespace

const KernelTable &avx2_table() noexcept {
  static const KernelTable table{"avx2",      dot_conj_avx2, norm_sq_avx2,   axpy_avx2,
                                 rotate_avx2, dot_real_avx2, scale_real_avx2};
  return table;
}

}  // namespace dpst::kernels
