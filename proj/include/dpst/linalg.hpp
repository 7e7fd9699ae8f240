// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "dpst/complex_matrix.hpp"

namespace dpst {

/// Full singular value decomposition a = u * diag(sigma) * v^H.
/// u is rows x rows, v is cols x cols, sigma has min(rows, cols) entries in
/// non-increasing order.
struct SvdResult {
  ComplexMatrix u;
  std::vector<double> sigma;
  ComplexMatrix v;
};

/// One-sided (Hestenes) Jacobi SVD. Throws NumericalError if the sweeps do
/// not converge.
SvdResult svd(const ComplexMatrix &a);

/// Economy-size SVD: u is rows x k and v is cols x k, k = min(rows, cols).
SvdResult svd_thin(const ComplexMatrix &a);

/// Singular values only, non-increasing. Same algorithm as svd() without
/// accumulating the singular vectors.
std::vector<double> singular_values(const ComplexMatrix &a);

/// Threshold below which the smallest singular value counts as zero,
/// relative to the largest.
inline constexpr double kRankTolerance = 1e-12;

/// sigma_max / sigma_min, or +infinity when sigma_min < 1e-12 * sigma_max.
double condition_number(const ComplexMatrix &a);
double condition_number_from_sigma(const std::vector<double> &sigma);

/// Number of singular values above rel_tol * sigma_max.
std::size_t numerical_rank(const ComplexMatrix &a, double rel_tol = kRankTolerance);

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending; columns of `vectors` are the matching unit
/// eigenvectors.
struct HermitianEig {
  std::vector<double> values;
  ComplexMatrix vectors;
};
HermitianEig hermitian_eig(const ComplexMatrix &a);

/// Eigenvalues only (ascending).
std::vector<double> hermitian_eigenvalues(const ComplexMatrix &a);

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// [-neg_tol, 0) are clamped to zero; anything more negative is a
/// ModelError.
ComplexMatrix psd_sqrt(const ComplexMatrix &a, double neg_tol = 1e-10);

/// Solves a * x = b by LU with partial pivoting.
ComplexMatrix solve(const ComplexMatrix &a, const ComplexMatrix &b);
ComplexMatrix inverse(const ComplexMatrix &a);

/// log2 det(a) for Hermitian positive definite a (Cholesky).
double log2_det_hpd(const ComplexMatrix &a);

/// Largest |a - a^H| entry.
double hermitian_defect(const ComplexMatrix &a);

}  // namespace dpst
