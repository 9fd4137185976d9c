#pragma once

// Small dense linear algebra templated on the scalar type so that the
// Brown-Resnick kernels can carry dual numbers through factorizations.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "msvi/dual.hpp"

namespace msvi {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0.0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Lower-triangular Cholesky factor of a symmetric matrix. Pivots whose
/// value falls below `-tolerance` make the factorization fail (nullopt);
/// pivots in [-tolerance, tolerance] are treated as exact zeros.
template <class T>
std::optional<Matrix<T>> cholesky(const Matrix<T>& a, double tolerance = 1e-10) {
  using std::sqrt;
  const std::size_t n = a.rows();
  Matrix<T> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    T diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (value(diag) < -tolerance) return std::nullopt;
    if (value(diag) <= tolerance) {
      l(j, j) = T(0.0);
      for (std::size_t i = j + 1; i < n; ++i) l(i, j) = T(0.0);
      continue;
    }
    const T root = sqrt(diag);
    l(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      T s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / root;
    }
  }
  return l;
}

/// Solves L x = b for lower-triangular L with non-zero diagonal.
template <class T>
std::vector<T> forward_solve(const Matrix<T>& l, const std::vector<T>& b) {
  std::vector<T> x(b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
    x[i] /= l(i, i);
  }
  return x;
}

/// Solves L^T x = b for lower-triangular L with non-zero diagonal.
template <class T>
std::vector<T> backward_solve_transposed(const Matrix<T>& l, const std::vector<T>& b) {
  std::vector<T> x(b);
  for (std::size_t ii = x.size(); ii-- > 0;) {
    for (std::size_t k = ii + 1; k < x.size(); ++k) x[ii] -= l(k, ii) * x[k];
    x[ii] /= l(ii, ii);
  }
  return x;
}

}  // namespace msvi
