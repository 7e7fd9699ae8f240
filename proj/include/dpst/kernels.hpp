// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops used by the linear-algebra layer.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is picked once at startup from CPUID; the
// environment variable DPST_SIMD=scalar|avx2 overrides the choice. The
// variants are equivalence-tested against the scalar reference.
#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace dpst::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;

  /// sum_i conj(x[i]) * y[i]
  cplx (*dot_conj)(const cplx *x, const cplx *y, std::size_t n);
  /// sum_i |x[i]|^2
  double (*norm_sq)(const cplx *x, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(cplx a, const cplx *x, cplx *y, std::size_t n);
  /// Plane rotation of two columns:
  ///   x' = c*x - conj(s)*y,  y' = s*x + c*y
  /// with real c and complex s, |c|^2 + |s|^2 = 1.
  void (*rotate)(cplx *x, cplx *y, std::size_t n, double c, cplx s);
  /// sum_i x[i] * y[i] on real data
  double (*dot_real)(const double *x, const double *y, std::size_t n);
  /// y[i] = a * x[i] for real x, complex a (scaled copy of a real pulse)
  void (*scale_real)(cplx a, const double *x, cplx *y, std::size_t n);
};

/// Portable reference implementation.
const KernelTable &scalar_kernels() noexcept;

/// AVX2/FMA implementation; nullptr when not compiled in or not supported
/// by the running CPU.
const KernelTable *avx2_kernels() noexcept;

/// Kernel table in use for this process.
const KernelTable &active() noexcept;

/// Force a specific table ("scalar" or "avx2"). Returns false when the
/// requested table is unavailable. Intended for tests and benchmarks; not
/// thread-safe with respect to concurrent kernel calls.
bool select(std::string_view name) noexcept;

}  // namespace dpst::kernels
