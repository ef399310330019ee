#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "replearn/realizability.hpp"
#include "replearn/rng.hpp"

namespace replearn {

enum class FeatureLaw { gaussian, uniform_cube };

// Derivation tags keeping sampling streams disjoint by purpose.
namespace stream {
inline constexpr std::uint64_t train = 0x1;
inline constexpr std::uint64_t eval = 0x2;
inline constexpr std::uint64_t truth = 0x3;
inline constexpr std::uint64_t ground_rep = 0x4;
}  // namespace stream

/// Synthetic metadistribution: tasks share the hidden representation
/// h*(x) = B* x; each task draws its own halfspace on top of it and labels
/// i.i.d. feature vectors, flipping each label independently with
/// probability eta. With eta = 0 every sampled task is realizable by
/// construction.
struct SyntheticMeta {
  LinearRep b_star;
  FeatureLaw law = FeatureLaw::gaussian;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  double offset_min = -1.0, offset_max = 1.0;  // task threshold range
  // Restrict specializers to monotone thresholds (k = 1, a = +1). Without
  // this, half the sampled tasks are order-reversing and the metadistribution
  // is not realizable in the monotone sense.
  bool monotone_tasks = false;

  SyntheticMeta(LinearRep ground_truth, FeatureLaw feature_law, double eta,
                std::uint64_t seed_in)
      : b_star(std::move(ground_truth)), law(feature_law), noise_rate(eta), seed(seed_in) {
    require(eta >= 0.0 && eta < 0.5, "SyntheticMeta: noise rate must be in [0, 0.5)");
    // Unit rows keep representation outputs on the same scale as the
    // task-threshold range.
    for (std::size_t r = 0; r < b_star.B.rows; ++r) {
      auto row = b_star.B.row(r);
      const double nrm = std::sqrt(norm2_sq(row));
      require(nrm > 0.0, "SyntheticMeta: zero row in ground-truth representation");
      for (auto& v : row) v /= nrm;
    }
  }

  std::size_t d() const { return b_star.d(); }
  std::size_t k() const { return b_star.k(); }
};

/// A realized task: the hidden specializer plus the tag its point streams
/// derive from.
struct TaskHandle {
  Halfspace truth;
  std::uint64_t tag = 0;
};

/// t task datasets of n points each, together with their provenance.
struct MetaSample {
  std::vector<TaskDataset> tasks;
  std::uint64_t seed = 0;
  std::size_t t = 0, n = 0;
};

/// Random ground-truth representation with unit rows (one per seed).
inline LinearRep random_ground_rep(std::size_t k, std::size_t d, std::uint64_t seed) {
  Rng rng = Rng(seed).derive(stream::ground_rep);
  Matrix b(k, d);
  for (auto& v : b.a) v = rng.next_gaussian();
  return LinearRep(std::move(b));
}

inline TaskHandle make_task(const SyntheticMeta& meta, std::uint64_t purpose,
                            std::uint64_t index) {
  Rng rng = Rng(meta.seed).derive(purpose).derive(index).derive(stream::truth);
  Vec a;
  if (meta.monotone_tasks) {
    require(meta.k() == 1, "SyntheticMeta: monotone tasks need k = 1");
    a.assign(1, 1.0);
  } else {
    a = rng.gaussian_vec(meta.k());
    double nrm = std::sqrt(norm2_sq(a));
    while (nrm == 0.0) {  // essentially impossible, but keep the invariant
      a = rng.gaussian_vec(meta.k());
      nrm = std::sqrt(norm2_sq(a));
    }
    for (auto& v : a) v /= nrm;
  }
  const double w =
      meta.offset_min + (meta.offset_max - meta.offset_min) * rng.next_unit();
  return TaskHandle{Halfspace(std::move(a), w), Rng(meta.seed)
                                                    .derive(purpose)
                                                    .derive(index)
                                                    .next_u64()};
}

/// Point point_index of the task; pure in (meta, task, point_index).
inline LabeledPoint draw_point(const SyntheticMeta& meta, const TaskHandle& task,
                               std::uint64_t point_index) {
  Rng rng = Rng(task.tag).derive(point_index);
  Vec x(meta.d());
  if (meta.law == FeatureLaw::gaussian)
    for (auto& v : x) v = rng.next_gaussian();
  else
    for (auto& v : x) v = 2.0 * rng.next_unit() - 1.0;
  const Vec z = meta.b_star.B.apply(x);
  int y = task.truth.classify(z);
  if (meta.noise_rate > 0.0 && rng.next_bernoulli(meta.noise_rate)) y = -y;
  return LabeledPoint(std::move(x), y);
}

inline TaskDataset draw_dataset(const SyntheticMeta& meta, const TaskHandle& task,
                                std::size_t n, std::uint64_t point_offset = 0) {
  std::vector<LabeledPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(draw_point(meta, task, point_offset + i));
  return TaskDataset(std::move(pts), meta.d());
}

/// t independent tasks with n i.i.d. points each; reproducible from
/// (meta.seed, purpose, t, n).
inline MetaSample sample_meta(const SyntheticMeta& meta, std::size_t t, std::size_t n,
                              std::uint64_t purpose = stream::train) {
  require(t >= 1 && n >= 1, "sample_meta: t and n must be positive");
  MetaSample out;
  out.seed = meta.seed;
  out.t = t;
  out.n = n;
  out.tasks.reserve(t);
  for (std::size_t j = 0; j < t; ++j)
    out.tasks.push_back(draw_dataset(meta, make_task(meta, purpose, j), n));
  return out;
}

/// Degeneracy filter: true iff every min(n, k+1)-subset of the rows
/// y_i (x_{i,1..k} || 1) is full rank (projection by identity padding).
inline bool general_position_check(const TaskDataset& task, std::size_t k) {
  const std::size_t n = task.size();
  if (n == 0) return true;
  require(task.dim >= k, "general_position_check: k exceeds data dimension");
  Matrix rows(n, k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) rows(i, c) = task.points[i].y * task.points[i].x[c];
    rows(i, k) = task.points[i].y;
  }
  const std::size_t m = std::min(n, k + 1);
  bool degenerate = detail::for_each_combination(n, m, [&](std::span<const std::size_t> idx) {
    Matrix sub(m, k + 1);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c <= k; ++c) sub(r, c) = rows(idx[r], c);
    return !rows_independent(sub);
  });
  return !degenerate;
}

}  // namespace replearn
