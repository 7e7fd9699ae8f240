// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dpst {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major. Carries every channel, filter and
/// interpolation matrix in the simulator.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix ones(std::size_t rows, std::size_t cols);
  /// rows x cols with `diag` on the leading diagonal.
  static ComplexMatrix diagonal(std::span<const double> diag, std::size_t rows, std::size_t cols);
  static ComplexMatrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx &operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const cplx &operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<cplx> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const cplx> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<cplx> entries() noexcept { return data_; }
  std::span<const cplx> entries() const noexcept { return data_; }

  std::vector<cplx> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const cplx> values);

  /// Copy of rows [r0, r0+nr) x cols [c0, c0+nc).
  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix &b);
  /// Columns listed in `cols`, in order.
  ComplexMatrix select_columns(std::span<const std::size_t> cols) const;

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;

  bool all_finite() const noexcept;

  ComplexMatrix &operator+=(const ComplexMatrix &o);
  ComplexMatrix &operator-=(const ComplexMatrix &o);
  ComplexMatrix &operator*=(cplx s) noexcept;

  friend bool operator==(const ComplexMatrix &, const ComplexMatrix &) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b);

/// a * x for a column vector x.
std::vector<cplx> operator*(const ComplexMatrix &a, std::span<const cplx> x);

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b);

/// Largest absolute entrywise difference; dimensions must agree.
double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b);

double frobenius_norm(const ComplexMatrix &a);

}  // namespace dpst
