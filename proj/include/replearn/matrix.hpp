#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "replearn/common.hpp"

namespace replearn {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(std::span<const double> a) { return dot(a, a); }

/// Dense row-major matrix. Dimensions here are tiny (a handful of rows and
/// columns), so everything is done by plain Gaussian elimination.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(a.data() + r * cols, cols);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(a.data() + r * cols, cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  bool all_zero() const {
    return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
  }

  Vec apply(std::span<const double> x) const {
    Vec y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) y[i] = dot(row(i), x);
    return y;
  }
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += v * b(k, j);
    }
  return c;
}

struct LinSolve {
  bool ok = false;   // false when a pivot is exactly zero
  Vec x;             // solution (valid when ok)
  double det = 0.0;  // determinant of the system matrix
};

/// Solves A x = b for square A by Gaussian elimination with partial
/// pivoting. A and b are taken by value and consumed.
inline LinSolve gaussian_solve(Matrix A, Vec b) {
  const std::size_t n = A.rows;
  require(A.cols == n && b.size() == n, "gaussian_solve: shape mismatch");
  LinSolve out;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A(r, col)) > std::fabs(A(piv, col))) piv = r;
    if (A(piv, col) == 0.0) {
      out.det = 0.0;
      return out;
    }
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A(piv, c), A(col, c));
      std::swap(b[piv], b[col]);
      det = -det;
    }
    det *= A(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A(r, col) / A(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A(r, c) -= f * A(col, c);
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  out.ok = true;
  out.x = std::move(x);
  out.det = det;
  return out;
}

/// True when the rows of M are linearly independent, judged by the relative
/// determinant test |det(M M^T)| > kRankTol * prod ||row_i||^2.
inline bool rows_independent(const Matrix& m) {
  if (m.rows == 0 || m.rows > m.cols) return false;
  Matrix g(m.rows, m.rows);
  double scale = 1.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.rows; ++j) g(i, j) = dot(m.row(i), m.row(j));
    scale *= g(i, i);
  }
  LinSolve s = gaussian_solve(g, Vec(m.rows, 0.0));
  return std::fabs(s.det) > kRankTol * scale;
}

}  // namespace replearn
