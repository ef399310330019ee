#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "replearn/common.hpp"
#include "replearn/matrix.hpp"

namespace replearn {

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

/// One labeled example: features in R^d, label in {+1, -1}.
struct LabeledPoint {
  Vec x;
  int y = +1;

  LabeledPoint() = default;
  LabeledPoint(Vec features, int label) : x(std::move(features)), y(label) {
    require(y == +1 || y == -1, "LabeledPoint: label must be +1 or -1");
    require(all_finite(x), "LabeledPoint: non-finite feature");
  }
};

/// An ordered sample from one task. Duplicates are legal.
struct TaskDataset {
  std::vector<LabeledPoint> points;
  std::size_t dim = 0;

  TaskDataset() = default;
  TaskDataset(std::vector<LabeledPoint> pts, std::size_t d)
      : points(std::move(pts)), dim(d) {
    for (const auto& p : points)
      require(p.x.size() == dim, "TaskDataset: point dimension mismatch");
  }
  std::size_t size() const { return points.size(); }
};

/// A labeled point already mapped into the representation space R^k.
struct RepPoint {
  Vec z;
  int y = +1;
};

struct RepDataset {
  std::vector<RepPoint> points;
  std::size_t dim = 0;  // k

  RepDataset() = default;
  RepDataset(std::vector<RepPoint> pts, std::size_t k)
      : points(std::move(pts)), dim(k) {
    for (const auto& p : points) {
      require(p.z.size() == dim, "RepDataset: point dimension mismatch");
      require(p.y == +1 || p.y == -1, "RepDataset: label must be +1 or -1");
      require(all_finite(p.z), "RepDataset: non-finite coordinate");
    }
  }
  std::size_t size() const { return points.size(); }
};

/// n x (k+1) matrix whose i-th row is y_i * (z_i || 1).
struct AugMatrix {
  Matrix z;
  std::size_t n() const { return z.rows; }
};

/// Shared linear representation h(x) = B x with B a k x d matrix.
/// The all-zero matrix is rejected: learners never consider it.
struct LinearRep {
  Matrix B;

  LinearRep() = default;
  explicit LinearRep(Matrix b) : B(std::move(b)) {
    require(B.rows >= 1 && B.cols >= 1, "LinearRep: empty matrix");
    require(!B.all_zero(), "LinearRep: the zero representation is degenerate");
    require(all_finite(B.a), "LinearRep: non-finite entry");
  }
  std::size_t k() const { return B.rows; }
  std::size_t d() const { return B.cols; }
};

/// Specialized classifier f(z) = sign(a . z - w) with sign(0) = +1.
struct Halfspace {
  Vec a;
  double w = 0.0;

  Halfspace() = default;
  Halfspace(Vec a_in, double w_in) : a(std::move(a_in)), w(w_in) {
    require(all_finite(a) && std::isfinite(w), "Halfspace: non-finite parameter");
    bool zero = w == 0.0;
    for (double v : a) zero = zero && v == 0.0;
    require(!zero, "Halfspace: (a, w) must not both be zero");
  }

  int classify(std::span<const double> z) const {
    require(z.size() == a.size(), "Halfspace: dimension mismatch");
    return sign_pm(dot(a, z) - w);
  }
};

/// Builds the augmented matrix: row i = y_i * (z_i || 1).
inline AugMatrix augment(const RepDataset& data) {
  require(!data.points.empty(), "augment: empty dataset");
  const std::size_t k = data.dim;
  AugMatrix out;
  out.z = Matrix(data.size(), k + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.points[i];
    for (std::size_t j = 0; j < k; ++j) out.z(i, j) = p.y * p.z[j];
    out.z(i, k) = static_cast<double>(p.y);
  }
  return out;
}

/// Minimum-norm solution of Z_I a = target for a row subset I, i.e.
/// a = Z_I^T (Z_I Z_I^T)^{-1} target. Returns nullopt when Z_I Z_I^T is
/// singular under the relative determinant tolerance.
inline std::optional<Vec> solve_tight(const Matrix& z,
                                      std::span<const std::size_t> subset,
                                      std::span<const double> target) {
  const std::size_t m = subset.size();
  require(m >= 1 && m <= z.cols, "solve_tight: subset size out of range");
  require(target.size() == m, "solve_tight: target size mismatch");
  for (std::size_t i : subset) require(i < z.rows, "solve_tight: index out of range");

  Matrix gram(m, m);
  double scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      gram(i, j) = dot(z.row(subset[i]), z.row(subset[j]));
    scale *= gram(i, i);
  }
  LinSolve sol = gaussian_solve(gram, Vec(target.begin(), target.end()));
  if (!sol.ok || std::fabs(sol.det) <= kRankTol * scale) return std::nullopt;

  Vec a(z.cols, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = z.row(subset[i]);
    for (std::size_t c = 0; c < z.cols; ++c) a[c] += sol.x[i] * row[c];
  }
  return a;
}

inline std::optional<Vec> solve_tight(const AugMatrix& z,
                                      std::span<const std::size_t> subset,
                                      std::span<const double> target) {
  return solve_tight(z.z, subset, target);
}

/// Applies h(x) = B x to every point; labels and order are preserved.
inline RepDataset apply_rep(const LinearRep& rep, const TaskDataset& data) {
  require(rep.d() == data.dim, "apply_rep: representation/data dimension mismatch");
  std::vector<RepPoint> pts;
  pts.reserve(data.size());
  for (const auto& p : data.points) pts.push_back({rep.B.apply(p.x), p.y});
  return RepDataset(std::move(pts), rep.k());
}

}  // namespace replearn
