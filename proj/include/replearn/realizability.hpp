#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "replearn/geometry.hpp"

namespace replearn {

/// Specialized-classifier family: k-dimensional halfspaces sign(a.z - w),
/// or monotone thresholds sign(z - w) on a 1-dimensional representation.
enum class Family { halfspace, monotone };

enum class Verdict : int { nonrealizable = -1, realizable = +1 };

inline int verdict_value(Verdict v) { return static_cast<int>(v); }

/// Index subset of a dataset witnessing non-realizability. size_bound is the
/// family guarantee (k+2 for halfspaces, 2 for monotone thresholds).
struct Certificate {
  std::vector<std::size_t> indices;
  std::size_t size_bound = 0;
};

/// Sign pattern over a dataset; sigma_i = +1 marks a point a candidate
/// classifier gets right.
struct FlipVector {
  std::vector<int> sigma;
  double correct_fraction() const {
    if (sigma.empty()) return 0.0;
    std::size_t c = 0;
    for (int s : sigma) c += (s == +1);
    return static_cast<double>(c) / static_cast<double>(sigma.size());
  }
};

namespace detail {

/// Visits every size-s index combination of [n] in lexicographic order.
/// Visitor returns true to stop early.
template <typename Fn>
bool for_each_combination(std::size_t n, std::size_t s, Fn&& fn) {
  if (s == 0 || s > n) return false;
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (fn(std::span<const std::size_t>(idx))) return true;
    std::size_t i = s;
    while (i > 0 && idx[i - 1] == n - s + (i - 1)) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::pair<double, double> label_extremes(const RepDataset& data) {
  // (max over negative z, min over positive z); infinities when a side is empty.
  double max_neg = -std::numeric_limits<double>::infinity();
  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& p : data.points) {
    if (p.y == +1)
      min_pos = std::min(min_pos, p.z[0]);
    else
      max_neg = std::max(max_neg, p.z[0]);
  }
  return {max_neg, min_pos};
}

}  // namespace detail

/// Exact strict-separability oracle for halfspaces over R^k. Enumerates row
/// subsets I with |I| <= k+1, solves the tight system a = Z_I^+ 1, and
/// accepts iff some candidate satisfies every row constraint.
inline bool is_separable(const RepDataset& data) {
  require(!data.points.empty(), "is_separable: empty dataset");
  require(data.dim >= 1, "is_separable: k must be >= 1");
  const AugMatrix aug = augment(data);
  const std::size_t n = data.size();
  const std::size_t kp1 = data.dim + 1;
  const Vec ones(kp1, 1.0);

  bool found = false;
  for (std::size_t s = 1; s <= std::min(n, kp1) && !found; ++s) {
    found = detail::for_each_combination(n, s, [&](std::span<const std::size_t> subset) {
      auto cand = solve_tight(aug.z, subset, std::span<const double>(ones.data(), s));
      if (!cand) return false;
      for (std::size_t i = 0; i < n; ++i)
        if (dot(aug.z.row(i), *cand) < 1.0 - kMarginTol) return false;
      return true;
    });
  }
  return found;
}

/// Independent sort-free oracle for k = 1: realizable by a 1-d halfspace iff
/// the labels form at most one sign change along the line, in either
/// orientation (coincident opposite labels are never realizable).
inline bool is_separable_1d(const RepDataset& data) {
  require(!data.points.empty(), "is_separable_1d: empty dataset");
  require(data.dim == 1, "is_separable_1d: k must be 1");
  double max_neg, min_pos, max_pos = -std::numeric_limits<double>::infinity(),
                           min_neg = std::numeric_limits<double>::infinity();
  std::tie(max_neg, min_pos) = detail::label_extremes(data);
  bool has_pos = false, has_neg = false;
  for (const auto& p : data.points) {
    if (p.y == +1) {
      has_pos = true;
      max_pos = std::max(max_pos, p.z[0]);
    } else {
      has_neg = true;
      min_neg = std::min(min_neg, p.z[0]);
    }
  }
  if (!has_pos || !has_neg) return true;
  return max_neg < min_pos || max_pos < min_neg;
}

/// Monotone-threshold realizability: +1 iff the smallest positive value
/// strictly exceeds the largest negative value (a vacuous side passes).
inline Verdict monotone_realizable(const RepDataset& data) {
  require(!data.points.empty(), "monotone_realizable: empty dataset");
  require(data.dim == 1, "monotone_realizable: k must be 1");
  auto [max_neg, min_pos] = detail::label_extremes(data);
  return min_pos > max_neg ? Verdict::realizable : Verdict::nonrealizable;
}

inline bool family_realizable(const RepDataset& data, Family family) {
  if (family == Family::monotone)
    return monotone_realizable(data) == Verdict::realizable;
  if (data.dim == 1) return is_separable_1d(data);
  return is_separable(data);
}

/// Greedy deletion certificate: repeatedly drop any point whose removal
/// keeps the remainder nonrealizable. The survivors are themselves
/// nonrealizable, with |survivors| <= k+2 for halfspaces and <= 2 for
/// monotone thresholds.
inline Certificate extract_certificate(const RepDataset& data, Family family) {
  if (family_realizable(data, family))
    throw PreconditionViolated("extract_certificate: input is realizable");

  std::vector<std::size_t> live(data.size());
  std::iota(live.begin(), live.end(), 0);

  auto restricted = [&](const std::vector<std::size_t>& keep) {
    std::vector<RepPoint> pts;
    pts.reserve(keep.size());
    for (std::size_t i : keep) pts.push_back(data.points[i]);
    return RepDataset(std::move(pts), data.dim);
  };

  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    for (std::size_t pos = 0; pos < live.size(); ++pos) {
      if (live.size() == 1) break;
      std::vector<std::size_t> trial = live;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      if (!family_realizable(restricted(trial), family)) {
        live = std::move(trial);
        shrunk = true;
        --pos;
      }
    }
  }
  Certificate cert;
  cert.indices = std::move(live);
  cert.size_bound = family == Family::monotone ? 2 : data.dim + 2;
  return cert;
}

/// r_h: +1 iff the task's sample, pushed through the representation, is
/// perfectly classifiable by the family.
inline Verdict realizability_predicate(const LinearRep& rep, const TaskDataset& task,
                                       Family family) {
  if (family == Family::monotone)
    require(rep.k() == 1, "realizability_predicate: monotone family needs k = 1");
  const RepDataset projected = apply_rep(rep, task);
  return family_realizable(projected, family) ? Verdict::realizable
                                              : Verdict::nonrealizable;
}

struct ErmResult {
  double error = 0.0;  // weighted misclassified fraction
  Halfspace classifier;
  FlipVector flips;  // sigma_i = +1 where the winning classifier is correct
};

inline FlipVector flips_of(const RepDataset& data, const Halfspace& f) {
  FlipVector out;
  out.sigma.reserve(data.size());
  for (const auto& p : data.points)
    out.sigma.push_back(f.classify(p.z) == p.y ? +1 : -1);
  return out;
}

namespace detail {

inline double classifier_weighted_error(const RepDataset& data,
                                        std::span<const double> weights,
                                        std::span<const double> aug_cand,
                                        const AugMatrix& aug) {
  // aug row i dot candidate  ==  y_i (a.z_i - w); correct iff > 0, or == 0
  // with y_i = +1 (sign(0) = +1).
  double err = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = dot(aug.z.row(i), aug_cand);
    const bool correct = v > 0.0 || (v == 0.0 && data.points[i].y == +1);
    if (!correct) err += weights[i];
  }
  return err;
}

/// Exact 1-d sweep. Orientation o in {+1,-1}: predict +1 iff o*z - c >= 0.
/// Error is piecewise constant in c with breakpoints at the data values, so
/// scanning sorted values plus one point above the maximum is exhaustive.
inline ErmResult erm_sweep_1d(const RepDataset& data, std::span<const double> weights,
                              bool monotone_only) {
  const std::size_t n = data.size();
  double total = 0.0;
  for (double w : weights) total += w;

  ErmResult best;
  best.error = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(n);
  std::vector<double> key(n);
  for (int oi = 0; oi < (monotone_only ? 1 : 2); ++oi) {
    const double o = oi == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) key[i] = o * data.points[i].z[0];
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

    // err(j) = (positives among ranks < j) + (negatives among ranks >= j),
    // where ranks >= j are predicted +1. Ties share a side, so only group
    // boundaries are candidate thresholds.
    std::vector<double> pref_pos(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      pref_pos[j + 1] = pref_pos[j] + (data.points[order[j]].y == +1 ? weights[order[j]] : 0.0);
    std::vector<double> pref_neg(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      pref_neg[j + 1] = pref_neg[j] + (data.points[order[j]].y == -1 ? weights[order[j]] : 0.0);
    const double neg_total = pref_neg[n];

    std::size_t j = 0;
    while (j <= n) {
      // Candidate boundary: rank j starts the predicted-positive block.
      // Valid only at group boundaries (equal keys classify together).
      if (j == n || j == 0 || key[order[j]] > key[order[j - 1]]) {
        const double err = pref_pos[j] + (neg_total - pref_neg[j]);
        if (err < best.error - 1e-15) {
          best.error = err;
          const double c = j == n ? key[order[n - 1]] + 1.0 : key[order[j]];
          best.classifier = Halfspace(Vec{o}, c);
        }
      }
      ++j;
    }
  }
  best.error /= total;
  best.flips = flips_of(data, best.classifier);
  return best;
}

}  // namespace detail

/// Exact weighted ERM over halfspaces in R^k. For k = 1 a threshold sweep;
/// for k >= 2, enumeration of tight subsets I (|I| <= k+1) with every sign
/// pattern sigma_I, candidate a = Z_I^+ sigma_I, plus the two constant
/// classifiers. The optimum's flip vector is witnessed by some tight subset,
/// so the best candidate attains the exact minimum.
inline ErmResult best_halfspace(const RepDataset& data,
                                std::span<const double> weights_in = {}) {
  require(!data.points.empty(), "best_halfspace: empty dataset");
  const std::size_t n = data.size();
  Vec uniform;
  std::span<const double> weights = weights_in;
  if (weights.empty()) {
    uniform.assign(n, 1.0);
    weights = uniform;
  }
  require(weights.size() == n, "best_halfspace: weight count mismatch");

  if (data.dim == 1) return detail::erm_sweep_1d(data, weights, /*monotone_only=*/false);

  double total = 0.0, pos_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += weights[i];
    if (data.points[i].y == +1) pos_w += weights[i];
  }

  const AugMatrix aug = augment(data);
  const std::size_t kp1 = data.dim + 1;

  ErmResult best;
  // Constant classifiers: all +1 (a = 0, w = -1) and all -1 (a = 0, w = +1).
  best.error = (total - pos_w) / total;
  best.classifier = Halfspace(Vec(data.dim, 0.0), -1.0);
  if (pos_w / total < best.error) {
    best.error = pos_w / total;
    best.classifier = Halfspace(Vec(data.dim, 0.0), 1.0);
  }

  Vec target;
  for (std::size_t s = 1; s <= std::min(n, kp1); ++s) {
    detail::for_each_combination(n, s, [&](std::span<const std::size_t> subset) {
      target.assign(s, 1.0);
      // Every sign pattern on the subset.
      const std::size_t patterns = std::size_t{1} << s;
      for (std::size_t bits = 0; bits < patterns; ++bits) {
        for (std::size_t b = 0; b < s; ++b) target[b] = (bits >> b) & 1 ? -1.0 : 1.0;
        auto cand = solve_tight(aug.z, subset, target);
        if (!cand) break;  // singular subset: no pattern helps
        const double err =
            detail::classifier_weighted_error(data, weights, *cand, aug) / total;
        if (err < best.error - 1e-15) {
          best.error = err;
          Vec a(cand->begin(), cand->begin() + static_cast<std::ptrdiff_t>(data.dim));
          best.classifier = Halfspace(std::move(a), -(*cand)[data.dim]);
        }
      }
      return false;
    });
  }
  best.flips = flips_of(data, best.classifier);
  return best;
}

/// Exact weighted minimum error for the family (monotone thresholds sweep
/// one orientation only).
inline double family_min_error(const RepDataset& data, Family family,
                               std::span<const double> weights = {}) {
  if (family == Family::monotone) {
    require(data.dim == 1, "family_min_error: monotone family needs k = 1");
    Vec uniform;
    std::span<const double> w = weights;
    if (w.empty()) {
      uniform.assign(data.size(), 1.0);
      w = uniform;
    }
    return detail::erm_sweep_1d(data, w, /*monotone_only=*/true).error;
  }
  return best_halfspace(data, weights).error;
}

/// q_h: the exact minimum training-error fraction of the family on the
/// task's sample after applying the representation. Times n it is an integer.
inline double empirical_error(const LinearRep& rep, const TaskDataset& task,
                              Family family = Family::halfspace) {
  require(task.size() >= 1, "empirical_error: empty dataset");
  return family_min_error(apply_rep(rep, task), family);
}

}  // namespace replearn
