#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "replearn/realizability.hpp"
#include "replearn/rng.hpp"
#include "replearn/task_model.hpp"

namespace replearn {

/// Knobs of the randomized local search that realizes the ERM learners.
struct SearchConfig {
  std::size_t restarts = 32;
  std::size_t iters = 400;
  double step0 = 0.5;
  double step_decay = 0.95;
  std::size_t pool = 4;  // random inits scored per restart; best one seeds the walk
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // worker cap for restarts

  SearchConfig() = default;
  void validate() const {
    require(restarts >= 1 && iters >= 1, "SearchConfig: restarts and iters must be >= 1");
    require(pool >= 1, "SearchConfig: pool must be >= 1");
  }
};

struct LearnResult {
  LinearRep rep;
  double objective = 0.0;
  std::vector<double> accepted_trace;  // objective after each accepted step
};

struct MultitaskModel {
  LinearRep rep;
  std::vector<Halfspace> specialists;
  double training_error = 0.0;
};

namespace detail {

/// Deterministic parallel map over [0, n): results indexed by input order, so
/// the outcome is independent of the number of workers.
template <typename Fn>
void parallel_index_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

/// Row-wise Gram-Schmidt. Returns false when a row degenerates, which
/// callers treat as a rejected proposal.
inline bool orthonormalize_rows(Matrix& b) {
  for (std::size_t r = 0; r < b.rows; ++r) {
    auto row = b.row(r);
    for (std::size_t p = 0; p < r; ++p) {
      const double proj = dot(row, b.row(p));
      const auto prow = b.row(p);
      for (std::size_t c = 0; c < b.cols; ++c) row[c] -= proj * prow[c];
    }
    const double nrm = std::sqrt(norm2_sq(row));
    if (nrm < 1e-9) return false;
    for (auto& v : row) v /= nrm;
  }
  return true;
}

inline Matrix random_orthonormal(std::size_t k, std::size_t d, Rng& rng) {
  Matrix b(k, d);
  do {
    for (auto& v : b.a) v = rng.next_gaussian();
  } while (!orthonormalize_rows(b));
  return b;
}

}  // namespace detail

/// Annealed coordinate search over row-orthonormal k x d representations.
/// objective(B, bound) may stop accumulating once its running value exceeds
/// bound (any value > bound is then a valid return). A proposal is accepted
/// iff the objective does not increase. Restarts are independent streams
/// merged by argmin with lowest-index tie-break.
template <typename Obj>
LearnResult search_representation(std::size_t k, std::size_t d, Obj&& objective,
                                  const SearchConfig& cfg) {
  cfg.validate();
  require(k >= 1 && d >= 1, "search_representation: bad dimensions");
  const double inf = std::numeric_limits<double>::infinity();

  struct RestartOut {
    Matrix b;
    double value = 0.0;
    std::vector<double> trace;
  };
  std::vector<RestartOut> outs(cfg.restarts);

  detail::parallel_index_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
    Rng rng = Rng(cfg.seed).derive(0x5ea4c2u).derive(r);
    Matrix best;
    double best_val = inf;
    for (std::size_t p = 0; p < cfg.pool; ++p) {
      Matrix cand = detail::random_orthonormal(k, d, rng);
      const double v = objective(cand, best_val);
      if (v < best_val) {
        best_val = v;
        best = std::move(cand);
      }
    }
    RestartOut out;
    out.trace.push_back(best_val);
    double step = cfg.step0;
    for (std::size_t it = 0; it < cfg.iters && best_val > 0.0; ++it) {
      Matrix cand = best;
      const std::size_t entry = rng.next_index(k * d);
      cand.a[entry] += step * rng.next_gaussian();
      step *= cfg.step_decay;
      if (!detail::orthonormalize_rows(cand)) continue;
      const double v = objective(cand, best_val);
      if (v <= best_val) {
        best_val = v;
        best = std::move(cand);
        out.trace.push_back(best_val);
      }
    }
    out.b = std::move(best);
    out.value = best_val;
    outs[r] = std::move(out);
  });

  std::size_t argmin = 0;
  for (std::size_t r = 1; r < cfg.restarts; ++r)
    if (outs[r].value < outs[argmin].value) argmin = r;
  LearnResult res;
  res.rep = LinearRep(std::move(outs[argmin].b));
  res.objective = outs[argmin].value;
  res.accepted_trace = std::move(outs[argmin].trace);
  return res;
}

namespace detail {

struct PairConstraints {
  std::vector<Vec> u;  // oriented difference vectors x_+ - x_- per mixed task
  std::size_t d = 0;
};

inline PairConstraints difference_vectors(const MetaSample& sample) {
  PairConstraints pc;
  require(!sample.tasks.empty(), "metalearn_monotone: no tasks");
  pc.d = sample.tasks.front().dim;
  for (const auto& task : sample.tasks) {
    require(task.size() == 2, "metalearn_monotone: every task must have exactly 2 samples");
    const auto& p0 = task.points[0];
    const auto& p1 = task.points[1];
    if (p0.y == p1.y) continue;  // same-label pairs constrain nothing
    const auto& pos = p0.y == +1 ? p0 : p1;
    const auto& neg = p0.y == +1 ? p1 : p0;
    Vec u(pc.d);
    for (std::size_t c = 0; c < pc.d; ++c) u[c] = pos.x[c] - neg.x[c];
    pc.u.push_back(std::move(u));
  }
  return pc;
}

inline std::size_t count_violations(const std::vector<Vec>& us, const Vec& b) {
  std::size_t v = 0;
  for (const auto& u : us)
    if (dot(u, b) <= 0.0) ++v;
  return v;
}

// Subsets enumerated by the exact homogeneous-feasibility route are capped;
// beyond the cap the learner switches to perceptron iteration.
inline constexpr std::size_t kExactSubsetBudget = 200000;
inline constexpr std::size_t kExactDimCap = 8;

inline bool exact_route_feasible(std::size_t m, std::size_t d) {
  if (d > kExactDimCap || m == 0) return false;
  double total = 0.0;
  double binom = 1.0;
  for (std::size_t s = 1; s <= std::min(m, d); ++s) {
    binom *= static_cast<double>(m - s + 1) / static_cast<double>(s);
    total += binom;
    if (total > static_cast<double>(kExactSubsetBudget)) return false;
  }
  return true;
}

}  // namespace detail

/// Two-samples-per-task metalearner for monotone thresholds over 1-d linear
/// representations. Opposite-label pairs yield homogeneous constraints
/// b . (x_+ - x_-) > 0. Small systems are decided exactly by tight-subset
/// enumeration (the augmented-matrix machinery with the offset column
/// removed); large ones fall back to perceptron iteration. On infeasible
/// input the best violation count seen is returned.
inline LearnResult metalearn_monotone(const MetaSample& sample) {
  detail::PairConstraints pc = detail::difference_vectors(sample);
  const std::size_t d = pc.d;
  require(d >= 1, "metalearn_monotone: empty feature space");

  auto finish = [&](Vec b, double violations) {
    const double nrm = std::sqrt(norm2_sq(b));
    if (nrm > 0.0)
      for (auto& v : b) v /= nrm;
    else
      b[0] = 1.0;  // degenerate candidate (coincident pair); any direction ties
    Matrix m(1, d);
    for (std::size_t c = 0; c < d; ++c) m(0, c) = b[c];
    LearnResult res;
    res.rep = LinearRep(std::move(m));
    res.objective = violations;
    res.accepted_trace = {violations};
    return res;
  };

  if (pc.u.empty()) {
    Vec b(d, 0.0);
    b[0] = 1.0;  // unconstrained: any unit direction attains zero violations
    return finish(std::move(b), 0.0);
  }

  const std::size_t m = pc.u.size();
  Vec best_b = pc.u.front();
  std::size_t best_viol = detail::count_violations(pc.u, best_b);

  if (detail::exact_route_feasible(m, d)) {
    Matrix rows(m, d);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < d; ++c) rows(i, c) = pc.u[i][c];
    Vec target;
    for (std::size_t s = 1; s <= std::min(m, d) && best_viol > 0; ++s) {
      detail::for_each_combination(m, s, [&](std::span<const std::size_t> subset) {
        target.assign(s, 1.0);
        auto cand = solve_tight(rows, subset, target);
        if (!cand) return false;
        bool all = true;
        for (const auto& u : pc.u)
          if (dot(u, *cand) < 1.0 - kMarginTol) {
            all = false;
            break;
          }
        if (all) {
          best_b = *cand;
          best_viol = 0;
          return true;
        }
        const std::size_t viol = detail::count_violations(pc.u, *cand);
        if (viol < best_viol) {
          best_viol = viol;
          best_b = *cand;
        }
        return false;
      });
    }
    return finish(std::move(best_b), static_cast<double>(best_viol));
  }

  // Perceptron on the homogeneous system; converges whenever the input is
  // feasible, and the best iterate is kept either way.
  Vec b = pc.u.front();
  const std::size_t update_cap = std::max<std::size_t>(200000, 100 * m);
  std::size_t updates = 0;
  bool clean = false;
  while (!clean && updates < update_cap) {
    clean = true;
    for (const auto& u : pc.u) {
      if (dot(u, b) <= 0.0) {
        for (std::size_t c = 0; c < d; ++c) b[c] += u[c];
        ++updates;
        clean = false;
      }
    }
    if (clean) break;
    const std::size_t viol = detail::count_violations(pc.u, b);
    if (viol < best_viol) {
      best_viol = viol;
      best_b = b;
    }
  }
  if (clean) return finish(std::move(b), 0.0);
  return finish(std::move(best_b), static_cast<double>(best_viol));
}

/// Realizable-case metalearner: pick the representation minimizing the number
/// of tasks whose sample it cannot realize. With family = monotone and n = 2
/// this is solved by the dedicated two-sample learner.
inline LearnResult metalearn_realizable(const MetaSample& sample, std::size_t k,
                                        Family family, const SearchConfig& cfg) {
  require(!sample.tasks.empty(), "metalearn_realizable: no tasks");
  if (family == Family::monotone) {
    require(k == 1, "metalearn_realizable: monotone family needs k = 1");
    if (sample.n == 2) return metalearn_monotone(sample);
  }
  const std::size_t d = sample.tasks.front().dim;
  auto objective = [&](const Matrix& b, double bound) {
    const LinearRep rep{b};
    double count = 0.0;
    for (const auto& task : sample.tasks) {
      if (realizability_predicate(rep, task, family) == Verdict::nonrealizable)
        count += 1.0;
      if (count > bound) return count;
    }
    return count;
  };
  return search_representation(k, d, objective, cfg);
}

/// Agnostic metalearner: minimize the mean exact training error across tasks.
inline LearnResult metalearn_agnostic(const MetaSample& sample, std::size_t k,
                                      const SearchConfig& cfg) {
  require(!sample.tasks.empty(), "metalearn_agnostic: no tasks");
  const std::size_t d = sample.tasks.front().dim;
  const double t = static_cast<double>(sample.tasks.size());
  auto objective = [&](const Matrix& b, double bound) {
    const LinearRep rep{b};
    double sum = 0.0;
    for (const auto& task : sample.tasks) {
      sum += empirical_error(rep, task, Family::halfspace) / t;
      if (sum > bound) return sum;
    }
    return sum;
  };
  return search_representation(k, d, objective, cfg);
}

/// Exact per-task ERM on top of a fixed representation.
inline Halfspace specialize(const LinearRep& rep, const TaskDataset& data) {
  require(data.size() >= 1, "specialize: empty dataset");
  return best_halfspace(apply_rep(rep, data)).classifier;
}

/// Multitask ERM over shared-representation halfspace models: the outer
/// representation by search, the inner specialists exactly per task.
inline MultitaskModel multitask_erm(const std::vector<TaskDataset>& tasks, std::size_t k,
                                    const SearchConfig& cfg) {
  require(!tasks.empty(), "multitask_erm: need at least one task");
  const std::size_t d = tasks.front().dim;
  for (const auto& task : tasks) {
    require(task.dim == d, "multitask_erm: task dimensions differ");
    require(task.size() >= 1, "multitask_erm: empty task");
  }
  const double t = static_cast<double>(tasks.size());
  auto objective = [&](const Matrix& b, double bound) {
    const LinearRep rep{b};
    double sum = 0.0;
    for (const auto& task : tasks) {
      sum += empirical_error(rep, task, Family::halfspace) / t;
      if (sum > bound) return sum;
    }
    return sum;
  };
  LearnResult res = search_representation(k, d, objective, cfg);

  MultitaskModel model;
  model.rep = std::move(res.rep);
  model.training_error = res.objective;
  model.specialists.reserve(tasks.size());
  for (const auto& task : tasks) model.specialists.push_back(specialize(model.rep, task));
  return model;
}

}  // namespace replearn
