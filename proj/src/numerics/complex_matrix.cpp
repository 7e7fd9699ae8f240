// SPDX-License-Identifier: Apache-2.0
#include "dpst/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpst/kernels.hpp"

namespace dpst {

namespace {

void require_same_shape(const ComplexMatrix &a, const ComplexMatrix &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_)
    throw std::invalid_argument("ComplexMatrix: entry count " + std::to_string(data_.size()) + " != " +
                                std::to_string(rows_) + "x" + std::to_string(cols_));
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::ones(std::size_t rows, std::size_t cols) {
  return ComplexMatrix(rows, cols, std::vector<cplx>(rows * cols, cplx(1.0, 0.0)));
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag, std::size_t rows, std::size_t cols) {
  ComplexMatrix m(rows, cols);
  const std::size_t n = std::min({diag.size(), rows, cols});
  for (std::size_t i = 0; i < n; ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) { return diagonal(diag, diag.size(), diag.size()); }

std::vector<cplx> ComplexMatrix::column(std::size_t c) const {
  std::vector<cplx> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void ComplexMatrix::set_column(std::size_t c, std::span<const cplx> values) {
  if (values.size() != rows_) throw std::invalid_argument("set_column: length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

ComplexMatrix ComplexMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw std::invalid_argument("block: out of range");
  ComplexMatrix out(nr, nc);
  for (std::size_t r = 0; r < nr; ++r) std::copy_n(&(*this)(r0 + r, c0), nc, &out(r, 0));
  return out;
}

void ComplexMatrix::set_block(std::size_t r0, std::size_t c0, const ComplexMatrix &b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw std::invalid_argument("set_block: out of range");
  for (std::size_t r = 0; r < b.rows(); ++r) std::copy_n(&b(r, 0), b.cols(), &(*this)(r0 + r, c0));
}

ComplexMatrix ComplexMatrix::select_columns(std::span<const std::size_t> cols) const {
  ComplexMatrix out(rows_, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= cols_) throw std::invalid_argument("select_columns: index out of range");
    for (std::size_t r = 0; r < rows_; ++r) out(r, j) = (*this)(r, cols[j]);
  }
  return out;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](const cplx &z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix &ComplexMatrix::operator+=(const ComplexMatrix &o) {
  require_same_shape(*this, o, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix &ComplexMatrix::operator-=(const ComplexMatrix &o) {
  require_same_shape(*this, o, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix &ComplexMatrix::operator*=(cplx s) noexcept {
  for (auto &z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b) { return a -= b; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matrix product: inner dimensions " + std::to_string(a.cols()) + " and " +
                                std::to_string(b.rows()));
  const auto &k = kernels::active();
  ComplexMatrix c(a.rows(), b.cols());
  // Row i of C accumulates rows of B weighted by row i of A; all three are
  // contiguous in row-major storage.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx *crow = c.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const cplx aip = a(i, p);
      if (aip == cplx{}) continue;
      k.axpy(aip, b.row(p).data(), crow, b.cols());
    }
  }
  return c;
}

std::vector<cplx> operator*(const ComplexMatrix &a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector product: dimension mismatch");
  std::vector<cplx> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx acc{};
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q) out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return out;
}

double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

double frobenius_norm(const ComplexMatrix &a) {
  if (a.empty()) throw std::invalid_argument("frobenius_norm: empty matrix");
  return std::sqrt(kernels::active().norm_sq(a.entries().data(), a.size()));
}

}  // namespace dpst
