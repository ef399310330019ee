#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "replearn/learners.hpp"

namespace replearn {

/// Finitely supported distribution over R^k x {+1,-1}.
struct Atom {
  Vec z;
  int y = +1;
  double prob = 0.0;
};

struct DiscreteDist {
  std::vector<Atom> atoms;
  std::size_t dim = 0;

  DiscreteDist() = default;
  DiscreteDist(std::vector<Atom> atoms_in, std::size_t k)
      : atoms(std::move(atoms_in)), dim(k) {
    require(!atoms.empty(), "DiscreteDist: no atoms");
    double sum = 0.0;
    for (const auto& a : atoms) {
      require(a.z.size() == dim, "DiscreteDist: atom dimension mismatch");
      require(a.y == +1 || a.y == -1, "DiscreteDist: bad label");
      require(a.prob >= 0.0, "DiscreteDist: negative probability");
      sum += a.prob;
    }
    require(std::fabs(sum - 1.0) <= 1e-12, "DiscreteDist: probabilities must sum to 1");
  }

  /// Positive-label mass.
  double rho() const {
    double r = 0.0;
    for (const auto& a : atoms)
      if (a.y == +1) r += a.prob;
    return r;
  }

  RepDataset support() const {
    std::vector<RepPoint> pts;
    for (const auto& a : atoms) pts.push_back({a.z, a.y});
    return RepDataset(std::move(pts), dim);
  }
};

/// Exact minimum expected error of the family on the distribution
/// (atom-weighted analogue of the training-error minimum).
inline double exact_err(const DiscreteDist& dist, Family family) {
  Vec weights;
  for (const auto& a : dist.atoms) weights.push_back(a.prob);
  return family_min_error(dist.support(), family, weights);
}

struct PnrEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // 0 on the exact path
  bool exact = true;
};

inline constexpr std::size_t kPnrEnumerationCap = 1000000;
inline constexpr std::size_t kPnrDefaultDraws = 100000;

/// Probability that m i.i.d. draws form a dataset the family cannot
/// realize. Exact tuple enumeration up to 10^6 tuples, Monte-Carlo with a
/// Wilson-interval standard error beyond that. MC draws use per-index
/// streams and may be partitioned across workers; the tally is identical
/// for every thread count.
inline PnrEstimate exact_pnr(const DiscreteDist& dist, Family family, std::size_t m,
                             std::uint64_t mc_seed = 1,
                             std::size_t mc_draws = kPnrDefaultDraws,
                             std::size_t mc_threads = 1) {
  require(m >= 1, "exact_pnr: m must be >= 1");
  const std::size_t na = dist.atoms.size();

  double tuples = 1.0;
  for (std::size_t i = 0; i < m; ++i) tuples *= static_cast<double>(na);

  auto tuple_nonrealizable = [&](const std::vector<std::size_t>& pick) {
    std::vector<RepPoint> pts;
    pts.reserve(m);
    for (std::size_t i : pick) pts.push_back({dist.atoms[i].z, dist.atoms[i].y});
    return !family_realizable(RepDataset(std::move(pts), dist.dim), family);
  };

  if (tuples <= static_cast<double>(kPnrEnumerationCap)) {
    PnrEstimate out;
    std::vector<std::size_t> pick(m, 0);
    while (true) {
      double p = 1.0;
      for (std::size_t i : pick) p *= dist.atoms[i].prob;
      if (p > 0.0 && tuple_nonrealizable(pick)) out.value += p;
      std::size_t pos = 0;
      while (pos < m && ++pick[pos] == na) pick[pos++] = 0;
      if (pos == m) break;
    }
    return out;
  }

  // Monte-Carlo path: inverse-CDF sampling of atoms, one stream per draw
  // index so a worker partition cannot change the tally.
  Vec cdf;
  double acc = 0.0;
  for (const auto& a : dist.atoms) cdf.push_back(acc += a.prob);
  cdf.back() = 1.0;
  const Rng base = Rng(mc_seed).derive(0x9972u);
  std::vector<std::uint8_t> hit(mc_draws, 0);
  detail::parallel_index_for(mc_draws, mc_threads, [&](std::size_t s) {
    Rng rng = base.derive(s);
    std::vector<std::size_t> pick(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = rng.next_unit();
      pick[i] = static_cast<std::size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
    if (tuple_nonrealizable(pick)) hit[s] = 1;
  });
  std::size_t hits = 0;
  for (std::uint8_t h : hit) hits += h;
  PnrEstimate out;
  out.exact = false;
  const double nn = static_cast<double>(mc_draws);
  const double phat = static_cast<double>(hits) / nn;
  out.value = phat;
  // Wilson half-width at one sigma.
  const double denom = 1.0 + 1.0 / nn;
  out.stderr_ = std::sqrt(phat * (1.0 - phat) / nn + 1.0 / (4.0 * nn * nn)) / denom;
  return out;
}

/// Evaluates (1/2) * (m err / (16 e v ln(16/err)))^m with v = max(vc, m):
/// a floor on the nonrealizability probability of any distribution whose
/// best-in-family error is err.
inline double pnr_lower_bound(double err, std::size_t m, std::size_t vc) {
  require(err > 0.0 && err <= 1.0, "pnr_lower_bound: err must be in (0, 1]");
  require(m >= 1, "pnr_lower_bound: m must be >= 1");
  const double v = static_cast<double>(std::max(vc, m));
  const double e = 2.718281828459045235;
  const double base =
      (static_cast<double>(m) * err) / (16.0 * e * v * std::log(16.0 / err));
  return 0.5 * std::pow(base, static_cast<double>(m));
}

struct MonBoundReport {
  double err = 0.0;
  double err_sq = 0.0;
  double pnr = 0.0;
  double slack = 0.0;
  bool pass = false;
};

/// Checks err(B, F_mon)^2 <= p_nr(B, F_mon, 2) on a 1-d distribution,
/// with 1e-12 slack on the exact path and 3 standard errors on the MC path.
inline MonBoundReport check_mon_bound(const DiscreteDist& dist) {
  require(dist.dim == 1, "check_mon_bound: k must be 1");
  MonBoundReport rep;
  rep.err = exact_err(dist, Family::monotone);
  rep.err_sq = rep.err * rep.err;
  PnrEstimate p = exact_pnr(dist, Family::monotone, 2);
  rep.pnr = p.value;
  rep.slack = p.exact ? 1e-12 : 3.0 * p.stderr_;
  rep.pass = rep.err_sq <= rep.pnr + rep.slack;
  return rep;
}

struct WitnessReport {
  std::size_t witness_size = 0;
  std::size_t labelings = 0;
  bool all_realized = false;
  std::vector<int> counterexample;  // first labeling that failed, if any
};

namespace detail {

/// Exact halfspace through given margins: solves [x_i || 1] c = y_i and
/// decodes (b, w) = (c_0..c_{dim-1}, -c_dim). Points must be affinely
/// independent.
inline std::pair<Vec, double> fit_exact_halfspace(const std::vector<Vec>& pts,
                                                  const std::vector<int>& ys) {
  const std::size_t dim = pts.front().size();
  const std::size_t n = pts.size();
  require(n == dim + 1, "fit_exact_halfspace: need dim+1 points");
  Matrix sys(n, n);
  Vec target(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) sys(i, c) = pts[i][c];
    sys(i, dim) = 1.0;
    target[i] = static_cast<double>(ys[i]);
  }
  LinSolve sol = gaussian_solve(std::move(sys), std::move(target));
  require(sol.ok, "fit_exact_halfspace: degenerate point set");
  Vec b(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(dim));
  return {std::move(b), -sol.x[dim]};
}

/// Simplex-style point set 0, e_1, ..., e_dim shattered by dim-dimensional
/// halfspaces.
inline std::vector<Vec> simplex_points(std::size_t dim) {
  std::vector<Vec> pts(dim + 1, Vec(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] = 1.0;
  return pts;
}

}  // namespace detail

inline constexpr std::size_t kWitnessCap = 16;

/// Shattering witness for the composite multitask class. For t <= k the
/// witness replicates a (d+1)-point halfspace-shattered set across tasks and
/// realizes each labeling with B stacked from per-task separators and
/// one-hot specialists; all t(d+1)-bit labelings are verified by direct
/// evaluation. For t > k the witness replicates a (k+1)-point set in the
/// representation space through an identity-padding projection, giving the
/// t(k+1) lower-bound witness.
inline WitnessReport vc_witness(std::size_t t, std::size_t d, std::size_t k) {
  require(t >= 1 && d >= 1 && k >= 1, "vc_witness: bad parameters");
  const bool replicate_full = t <= k;
  const std::size_t block = replicate_full ? d + 1 : k + 1;
  const std::size_t size = t * block;
  require(size <= kWitnessCap, "vc_witness: witness size exceeds the exhaustive cap");
  if (!replicate_full)
    require(d >= k, "vc_witness: t > k witness needs d >= k");

  const std::vector<Vec> base =
      detail::simplex_points(replicate_full ? d : k);

  // Feature-space points per task; for t > k they are base points padded to d.
  std::vector<Vec> xs(block, Vec(d, 0.0));
  for (std::size_t i = 0; i < block; ++i)
    for (std::size_t c = 0; c < base[i].size(); ++c) xs[i][c] = base[i][c];

  WitnessReport rep;
  rep.witness_size = size;
  rep.labelings = std::size_t{1} << size;
  rep.all_realized = true;

  std::vector<int> labels(size);
  for (std::size_t bits = 0; bits < rep.labelings; ++bits) {
    for (std::size_t i = 0; i < size; ++i) labels[i] = (bits >> i) & 1 ? +1 : -1;

    Matrix b(k, d);
    std::vector<Halfspace> specialists;
    specialists.reserve(t);
    bool ok = true;
    if (replicate_full) {
      for (std::size_t j = 0; j < t && ok; ++j) {
        std::vector<int> ys(labels.begin() + static_cast<std::ptrdiff_t>(j * block),
                            labels.begin() + static_cast<std::ptrdiff_t>((j + 1) * block));
        auto [bj, wj] = detail::fit_exact_halfspace(xs, ys);
        // Constant labelings fit b_j = 0, w_j = -y. A nudge keeps B nonzero;
        // coordinates are in [0, 1] so 0.25 cannot cross the unit threshold.
        if (std::all_of(bj.begin(), bj.end(), [](double v) { return v == 0.0; }))
          bj[0] = 0.25;
        for (std::size_t c = 0; c < d; ++c) b(j, c) = bj[c];
        Vec a(k, 0.0);
        a[j] = 1.0;
        specialists.emplace_back(std::move(a), wj);
      }
    } else {
      for (std::size_t c = 0; c < k; ++c) b(c, c) = 1.0;  // identity padding
      for (std::size_t j = 0; j < t && ok; ++j) {
        std::vector<int> ys(labels.begin() + static_cast<std::ptrdiff_t>(j * block),
                            labels.begin() + static_cast<std::ptrdiff_t>((j + 1) * block));
        auto [aj, wj] = detail::fit_exact_halfspace(base, ys);
        specialists.emplace_back(std::move(aj), wj);
      }
    }
    if (ok) {
      LinearRep shared{b};
      for (std::size_t j = 0; j < t && ok; ++j)
        for (std::size_t i = 0; i < block && ok; ++i) {
          const int got = specialists[j].classify(shared.B.apply(xs[i]));
          ok = got == labels[j * block + i];
        }
    }
    if (!ok) {
      rep.all_realized = false;
      rep.counterexample = labels;
      break;
    }
  }
  return rep;
}

/// Explicit finite class: label vectors over a finite domain.
struct FiniteClass {
  std::size_t domain = 0;
  std::vector<std::vector<int>> functions;

  FiniteClass(std::size_t domain_size, std::vector<std::vector<int>> fns)
      : domain(domain_size), functions(std::move(fns)) {
    require(domain >= 1 && domain <= 12, "FiniteClass: domain size must be in [1, 12]");
    require(!functions.empty(), "FiniteClass: no functions");
    for (const auto& f : functions) {
      require(f.size() == domain, "FiniteClass: function arity mismatch");
      for (int v : f) require(v == +1 || v == -1, "FiniteClass: labels must be +1/-1");
    }
  }
};

namespace detail {

/// Atom i of the labeled universe is (point i/2, label +1 if i even).
/// consistent_mask[f] holds the atoms function f agrees with.
inline std::vector<std::uint32_t> consistency_masks(const FiniteClass& cls) {
  std::vector<std::uint32_t> masks;
  masks.reserve(cls.functions.size());
  for (const auto& f : cls.functions) {
    std::uint32_t m = 0;
    for (std::size_t x = 0; x < cls.domain; ++x) {
      if (f[x] == +1) m |= 1u << (2 * x);
      else m |= 1u << (2 * x + 1);
    }
    masks.push_back(m);
  }
  return masks;
}

inline bool labeled_set_realizable(std::uint32_t set,
                                   const std::vector<std::uint32_t>& masks) {
  for (std::uint32_t m : masks)
    if ((set & ~m) == 0) return true;
  return false;
}

}  // namespace detail

/// Exact non-realizability-certificate complexity by exhaustion: the largest
/// nonrealizable labeled set all of whose proper subsets are realizable.
/// Returns 0 when every labeled set is realizable.
inline std::size_t finite_nrc(const FiniteClass& cls) {
  const auto masks = detail::consistency_masks(cls);
  const std::size_t bits = 2 * cls.domain;
  std::size_t nrc = 0;
  for (std::uint32_t set = 1; set < (1u << bits); ++set) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(set));
    if (size <= nrc) continue;
    if (detail::labeled_set_realizable(set, masks)) continue;
    bool minimal = true;
    for (std::size_t b = 0; b < bits && minimal; ++b)
      if (set & (1u << b))
        minimal = detail::labeled_set_realizable(set & ~(1u << b), masks);
    if (minimal) nrc = size;
  }
  return nrc;
}

/// Exact VC dimension by exhaustive shattering check.
inline std::size_t finite_vc(const FiniteClass& cls) {
  std::size_t vc = 0;
  for (std::uint32_t sub = 1; sub < (1u << cls.domain); ++sub) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(sub));
    if (size <= vc) continue;
    std::vector<std::size_t> pts;
    for (std::size_t x = 0; x < cls.domain; ++x)
      if (sub & (1u << x)) pts.push_back(x);
    std::vector<bool> seen(std::size_t{1} << size, false);
    std::size_t distinct = 0;
    for (const auto& f : cls.functions) {
      std::size_t pat = 0;
      for (std::size_t i = 0; i < size; ++i)
        if (f[pts[i]] == +1) pat |= std::size_t{1} << i;
      if (!seen[pat]) {
        seen[pat] = true;
        ++distinct;
      }
    }
    if (distinct == (std::size_t{1} << size)) vc = size;
  }
  return vc;
}

/// Point functions on [ell]: +1 at exactly one point.
inline FiniteClass point_function_class(std::size_t ell) {
  std::vector<std::vector<int>> fns;
  for (std::size_t x = 0; x < ell; ++x) {
    std::vector<int> f(ell, -1);
    f[x] = +1;
    fns.push_back(std::move(f));
  }
  return FiniteClass(ell, std::move(fns));
}

/// Point functions plus the constant -1 function (+1 at at most one point).
inline FiniteClass point_function_class_with_constant(std::size_t ell) {
  FiniteClass base = point_function_class(ell);
  base.functions.emplace_back(ell, -1);
  return base;
}

/// All functions on {0, 1, ..., ell} whose value at 0 is pinned to +1.
inline FiniteClass pinned_origin_class(std::size_t ell) {
  std::vector<std::vector<int>> fns;
  for (std::size_t bits = 0; bits < (std::size_t{1} << ell); ++bits) {
    std::vector<int> f(ell + 1, -1);
    f[0] = +1;
    for (std::size_t x = 0; x < ell; ++x)
      if ((bits >> x) & 1) f[x + 1] = +1;
    fns.push_back(std::move(f));
  }
  return FiniteClass(ell + 1, std::move(fns));
}

}  // namespace replearn
