// SPDX-License-Identifier: Apache-2.0
#include "dpst/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dpst/error.hpp"
#include "dpst/kernels.hpp"

namespace dpst {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 80;

// Column-major working copy; column j occupies [j*rows, (j+1)*rows).
struct ColumnMajor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> data;

  cplx *col(std::size_t j) { return data.data() + j * rows; }
  const cplx *col(std::size_t j) const { return data.data() + j * rows; }
};

ColumnMajor to_column_major(const ComplexMatrix &a) {
  ColumnMajor w{a.rows(), a.cols(), std::vector<cplx>(a.size())};
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) w.data[c * a.rows() + r] = a(r, c);
  return w;
}

// Orthogonalizes the columns of w in place (w <- w * J_1 * J_2 ...). When v
// is non-null the same rotations are applied to it. Requires rows >= cols.
void hestenes_sweeps(ColumnMajor &w, ColumnMajor *v) {
  const auto &k = kernels::active();
  const std::size_t n = w.cols;
  const double tol = 4.0 * kEps;
  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = k.norm_sq(w.col(j), w.rows);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    // Columns below eps * the largest column are numerical zeros; rotating
    // against them only chases round-off. svd_tall() completes their
    // left singular vectors separately.
    const double floor = kEps * kEps * *std::max_element(norms.begin(), norms.end());
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norms[p];
        const double beta = norms[q];
        if (alpha <= floor || beta <= floor) continue;
        const cplx gamma = k.dot_conj(w.col(p), w.col(q), w.rows);
        const double g = std::abs(gamma);
        if (g <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const cplx s = (c * t) * (gamma / g);
        k.rotate(w.col(p), w.col(q), w.rows, c, s);
        if (v != nullptr) k.rotate(v->col(p), v->col(q), v->rows, c, s);
        // Exact updates of the two column norms for this rotation.
        norms[p] = alpha - t * g;
        norms[q] = beta + t * g;
      }
    }
    if (!rotated) return;
    // Refresh norms once per sweep to stop drift from the running updates.
    for (std::size_t j = 0; j < n; ++j) norms[j] = k.norm_sq(w.col(j), w.rows);
  }
  throw NumericalError("svd: Jacobi sweeps did not converge after " + std::to_string(kMaxSweeps) + " sweeps");
}

// Fills columns of `u` (rows x rows, column-major) flagged in `missing` with
// unit vectors orthogonal to every other column.
void complete_orthonormal(ColumnMajor &u, const std::vector<bool> &missing) {
  const auto &k = kernels::active();
  const std::size_t m = u.rows;
  std::vector<bool> have(u.cols);
  for (std::size_t j = 0; j < u.cols; ++j) have[j] = !missing[j];
  std::vector<cplx> cand(m);
  for (std::size_t j = 0; j < u.cols; ++j) {
    if (have[j]) continue;
    double best_norm = -1.0;
    std::vector<cplx> best;
    for (std::size_t e = 0; e < m; ++e) {
      std::fill(cand.begin(), cand.end(), cplx{});
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < u.cols; ++i) {
          if (!have[i]) continue;
          const cplx proj = k.dot_conj(u.col(i), cand.data(), m);
          k.axpy(-proj, u.col(i), cand.data(), m);
        }
      const double nrm = std::sqrt(k.norm_sq(cand.data(), m));
      if (nrm > best_norm) {
        best_norm = nrm;
        best = cand;
      }
      if (nrm > 0.7) break;
    }
    for (std::size_t r = 0; r < m; ++r) u.col(j)[r] = best[r] / best_norm;
    have[j] = true;
  }
}

ComplexMatrix from_column_major(const ColumnMajor &w, const std::vector<std::size_t> &order) {
  ComplexMatrix out(w.rows, order.size());
  for (std::size_t j = 0; j < order.size(); ++j)
    for (std::size_t r = 0; r < w.rows; ++r) out(r, j) = w.col(order[j])[r];
  return out;
}

std::vector<std::size_t> descending_order(const std::vector<double> &values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

SvdResult svd_tall(const ComplexMatrix &a, bool thin) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  ColumnMajor w = to_column_major(a);
  ColumnMajor v = to_column_major(ComplexMatrix::identity(n));
  hestenes_sweeps(w, &v);

  const auto &k = kernels::active();
  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) sig[j] = std::sqrt(k.norm_sq(w.col(j), m));
  const auto order = descending_order(sig);
  const double smax = sig.empty() ? 0.0 : sig[order.front()];

  SvdResult out;
  out.sigma.resize(n);
  const std::size_t ucols = thin ? n : m;
  ColumnMajor u{m, ucols, std::vector<cplx>(m * ucols)};
  std::vector<bool> missing(ucols, true);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sig[src];
    if (sig[src] > smax * kEps && sig[src] > 0.0) {
      for (std::size_t r = 0; r < m; ++r) u.col(j)[r] = w.col(src)[r] / sig[src];
      missing[j] = false;
    }
  }
  complete_orthonormal(u, missing);
  std::vector<std::size_t> all(ucols);
  std::iota(all.begin(), all.end(), 0);
  out.u = from_column_major(u, all);
  out.v = from_column_major(v, order);
  return out;
}

void require_square(const ComplexMatrix &a, const char *op) {
  if (a.empty() || !a.is_square()) throw std::invalid_argument(std::string(op) + ": expects a non-empty square matrix");
}

}  // namespace

SvdResult svd(const ComplexMatrix &a) {
  if (a.empty()) throw std::invalid_argument("svd: empty matrix");
  if (a.rows() >= a.cols()) return svd_tall(a, false);
  // a^H = U S V^H  =>  a = V S U^H
  SvdResult t = svd_tall(a.adjoint(), false);
  return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

SvdResult svd_thin(const ComplexMatrix &a) {
  if (a.empty()) throw std::invalid_argument("svd_thin: empty matrix");
  if (a.rows() >= a.cols()) return svd_tall(a, true);
  SvdResult t = svd_tall(a.adjoint(), true);
  return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

std::vector<double> singular_values(const ComplexMatrix &a) {
  if (a.empty()) throw std::invalid_argument("singular_values: empty matrix");
  ColumnMajor w = to_column_major(a.rows() >= a.cols() ? a : a.adjoint());
  hestenes_sweeps(w, nullptr);
  const auto &k = kernels::active();
  std::vector<double> sig(w.cols);
  for (std::size_t j = 0; j < w.cols; ++j) sig[j] = std::sqrt(k.norm_sq(w.col(j), w.rows));
  std::sort(sig.begin(), sig.end(), std::greater<>());
  return sig;
}

double condition_number_from_sigma(const std::vector<double> &sigma) {
  if (sigma.empty()) throw std::invalid_argument("condition_number: no singular values");
  const double smax = sigma.front();
  const double smin = sigma.back();
  if (smax == 0.0 || smin < kRankTolerance * smax) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

double condition_number(const ComplexMatrix &a) { return condition_number_from_sigma(singular_values(a)); }

std::size_t numerical_rank(const ComplexMatrix &a, double rel_tol) {
  const auto sig = singular_values(a);
  if (sig.front() == 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(sig.begin(), sig.end(), [&](double s) { return s > rel_tol * sig.front(); }));
}

double hermitian_defect(const ComplexMatrix &a) {
  require_square(a, "hermitian_defect");
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

HermitianEig hermitian_eig(const ComplexMatrix &a) {
  require_square(a, "hermitian_eig");
  const std::size_t n = a.rows();
  const double scale = frobenius_norm(a);
  if (hermitian_defect(a) > 1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");

  ComplexMatrix m = a;
  for (std::size_t i = 0; i < n; ++i) m(i, i) = m(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_diagonal = [&]() {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += std::norm(m(i, j));
    return off;
  };

  const double target = kEps * kEps * scale * scale;
  int sweep = 0;
  while (off_diagonal() > target) {
    if (++sweep > kMaxSweeps) throw NumericalError("hermitian_eig: Jacobi sweeps did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = std::abs(m(p, q));
        if (g == 0.0) continue;
        const cplx phase = m(p, q) / g;  // e^{i phi}
        const double app = m(p, p).real();
        const double aqq = m(q, q).real();
        const double zeta = (aqq - app) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx ph_conj = std::conj(phase);
        // m <- m * J with J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q).
        for (std::size_t r = 0; r < n; ++r) {
          const cplx xp = m(r, p);
          const cplx xq = m(r, q);
          m(r, p) = c * xp - s * ph_conj * xq;
          m(r, q) = s * xp + c * ph_conj * xq;
          const cplx vp = v(r, p);
          const cplx vq = v(r, q);
          v(r, p) = c * vp - s * ph_conj * vq;
          v(r, q) = s * vp + c * ph_conj * vq;
        }
        // m <- J^H * m
        for (std::size_t col = 0; col < n; ++col) {
          const cplx xp = m(p, col);
          const cplx xq = m(q, col);
          m(p, col) = c * xp - s * phase * xq;
          m(q, col) = s * xp + c * phase * xq;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        m(p, p) = m(p, p).real();
        m(q, q) = m(q, q).real();
      }
    }
  }

  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = m(i, i).real();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return vals[x] < vals[y]; });
  HermitianEig out{std::vector<double>(n), v.select_columns(order)};
  for (std::size_t i = 0; i < n; ++i) out.values[i] = vals[order[i]];
  return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix &a) { return hermitian_eig(a).values; }

ComplexMatrix psd_sqrt(const ComplexMatrix &a, double neg_tol) {
  HermitianEig e = hermitian_eig(a);
  const std::size_t n = a.rows();
  if (e.values.front() < -neg_tol)
    throw ModelError("psd_sqrt: matrix is indefinite (min eigenvalue " + std::to_string(e.values.front()) + ")");
  ComplexMatrix out(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    const double r = std::sqrt(std::max(e.values[l], 0.0));
    if (r == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += r * e.vectors(i, l) * std::conj(e.vectors(j, l));
  }
  return out;
}

ComplexMatrix solve(const ComplexMatrix &a, const ComplexMatrix &b) {
  require_square(a, "solve");
  if (b.rows() != a.rows()) throw std::invalid_argument("solve: right-hand side has wrong row count");
  const std::size_t n = a.rows();
  ComplexMatrix lu = a;
  ComplexMatrix x = b;
  const double scale = frobenius_norm(a);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(lu(r, col)) > std::abs(lu(piv, col))) piv = r;
    if (std::abs(lu(piv, col)) <= kEps * scale || lu(piv, col) == cplx{})
      throw NumericalError("solve: matrix is singular to working precision");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(piv, c), lu(col, c));
      for (std::size_t c = 0; c < x.cols(); ++c) std::swap(x(piv, c), x(col, c));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const cplx f = lu(r, col) / lu(col, col);
      if (f == cplx{}) continue;
      for (std::size_t c = col; c < n; ++c) lu(r, c) -= f * lu(col, c);
      for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) -= f * x(col, c);
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t r = n; r-- > 0;) {
      cplx acc = x(r, c);
      for (std::size_t j = r + 1; j < n; ++j) acc -= lu(r, j) * x(j, c);
      x(r, c) = acc / lu(r, r);
    }
  }
  return x;
}

ComplexMatrix inverse(const ComplexMatrix &a) { return solve(a, ComplexMatrix::identity(a.rows())); }

double log2_det_hpd(const ComplexMatrix &a) {
  require_square(a, "log2_det_hpd");
  const std::size_t n = a.rows();
  ComplexMatrix l(n, n);
  double logdet = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw NumericalError("log2_det_hpd: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    logdet += 2.0 * std::log2(ljj);
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
      l(i, j) = acc / ljj;
    }
  }
  return logdet;
}

}  // namespace dpst
