#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "replearn/learners.hpp"

namespace replearn {

/// Improper, opaque per-task classifier: callable only. Deliberately exposes
/// no representation accessor.
class TaskClassifier {
 public:
  explicit TaskClassifier(std::function<int(const Vec&)> fn) : fn_(std::move(fn)) {}
  int operator()(const Vec& x) const { return fn_(x); }

 private:
  std::function<int(const Vec&)> fn_;
};

/// Stored state of the metalearner built from a multitask learner: it keeps
/// the t training datasets and reruns multitask ERM for every new task.
struct StoredSpecializer {
  std::vector<TaskDataset> stored;
  std::size_t k = 1;
  SearchConfig cfg;
  std::uint64_t seed = 0;

  std::size_t n() const { return stored.empty() ? 0 : stored.front().size(); }
};

/// Uniform slot in [0, t+1) for inserting the new task; a pure function of
/// (seed, call_tag), shared with the frequency tests.
inline std::size_t draw_insertion_slot(std::uint64_t seed, std::uint64_t call_tag,
                                       std::size_t t_plus_1) {
  return Rng(seed).derive(0xca11u).derive(call_tag).next_index(t_plus_1);
}

/// Metalearning from multitask learning: insert the new dataset at a uniform
/// slot among the stored ones, run multitask ERM on the t+1 tasks, and hand
/// back only that slot's classifier.
inline TaskClassifier meta_from_multitask(const StoredSpecializer& spec,
                                          const TaskDataset& new_data,
                                          std::uint64_t call_tag = 0) {
  require(!spec.stored.empty(), "meta_from_multitask: no stored tasks");
  require(new_data.size() == spec.n(),
          "meta_from_multitask: new task size differs from stored size");
  require(new_data.dim == spec.stored.front().dim,
          "meta_from_multitask: dimension mismatch");

  const std::size_t t = spec.stored.size();
  const std::size_t slot = draw_insertion_slot(spec.seed, call_tag, t + 1);

  std::vector<TaskDataset> pooled;
  pooled.reserve(t + 1);
  for (std::size_t j = 0; j < slot; ++j) pooled.push_back(spec.stored[j]);
  pooled.push_back(new_data);
  for (std::size_t j = slot; j < t; ++j) pooled.push_back(spec.stored[j]);

  MultitaskModel model = multitask_erm(pooled, spec.k, spec.cfg);
  LinearRep rep = std::move(model.rep);
  Halfspace f = std::move(model.specialists[slot]);
  return TaskClassifier([rep = std::move(rep), f = std::move(f)](const Vec& x) {
    return f.classify(rep.B.apply(x));
  });
}

/// One constructed metalearning dataset: n points carved from stored task
/// `task` at [begin, end).
struct CarveSlice {
  std::size_t task = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct CarvePlan {
  std::vector<std::size_t> draws;        // task index drawn for each slot
  std::vector<CarveSlice> train_slices;  // one per slot, disjoint
  std::vector<CarveSlice> spec_slices;   // one per original task, disjoint
};

/// With-replacement task draws plus front-to-back pool carving. Returns
/// nullopt (the reduction's Bot outcome) when any pool runs dry.
inline std::optional<CarvePlan> plan_carving(const std::vector<std::size_t>& pool_sizes,
                                             std::size_t n, std::size_t n_spec,
                                             Rng rng) {
  const std::size_t t = pool_sizes.size();
  CarvePlan plan;
  std::vector<std::size_t> cursor(t, 0);
  for (std::size_t j = 0; j < t; ++j) {
    const std::size_t pick = rng.next_index(t);
    plan.draws.push_back(pick);
    if (cursor[pick] + n > pool_sizes[pick]) return std::nullopt;
    plan.train_slices.push_back({pick, cursor[pick], cursor[pick] + n});
    cursor[pick] += n;
  }
  for (std::size_t j = 0; j < t; ++j) {
    if (cursor[j] + n_spec > pool_sizes[j]) return std::nullopt;
    plan.spec_slices.push_back({j, cursor[j], cursor[j] + n_spec});
    cursor[j] += n_spec;
  }
  return plan;
}

inline std::size_t reduction_oversampling(double c, std::size_t t) {
  const double v = 2.0 * std::log(c * static_cast<double>(t));
  return static_cast<std::size_t>(std::ceil(v));
}

/// Per-task sample budget of the multitask-from-metalearning reduction.
inline std::size_t reduction_budget(std::size_t n, double c, std::size_t t,
                                    std::size_t n_spec) {
  return n * reduction_oversampling(c, t) + n_spec;
}

/// With probability 1 - delta, t uniform draws over [t] put at most this
/// many balls into any one bin.
inline double balls_and_bins_bound(std::size_t t, double delta) {
  require(t >= 1 && delta > 0.0 && delta < 1.0, "balls_and_bins_bound: bad arguments");
  const double l = std::log(std::pow(static_cast<double>(t) / delta, 2.0));
  return l / std::log(l);
}

using Metalearner = std::function<LinearRep(const MetaSample&)>;

/// Multitask learning from metalearning: resample t task indices with
/// replacement, carve disjoint n-sample training sets for the metalearner,
/// then specialize every original task on n_spec reserved fresh samples.
/// Bot (nullopt) is a defined outcome, produced when resampling exhausts a
/// task's pool.
inline std::optional<std::vector<TaskClassifier>> multitask_from_meta(
    const std::vector<TaskDataset>& tasks, double c, const Metalearner& metalearn,
    std::size_t n, std::size_t n_spec, std::uint64_t seed) {
  require(!tasks.empty(), "multitask_from_meta: no tasks");
  require(c > 0.0, "multitask_from_meta: c must be positive");
  require(n >= 1 && n_spec >= 1, "multitask_from_meta: n and n_spec must be >= 1");
  const std::size_t t = tasks.size();
  const std::size_t d = tasks.front().dim;
  const std::size_t budget = reduction_budget(n, c, t, n_spec);
  std::vector<std::size_t> pool_sizes;
  for (const auto& task : tasks) {
    require(task.dim == d, "multitask_from_meta: task dimensions differ");
    require(task.size() >= budget,
            "multitask_from_meta: a task is below the n*ceil(2 ln(ct)) + n_spec budget");
    pool_sizes.push_back(task.size());
  }

  auto plan = plan_carving(pool_sizes, n, n_spec, Rng(seed).derive(0xb07u));
  if (!plan) return std::nullopt;

  MetaSample meta_input;
  meta_input.seed = seed;
  meta_input.t = t;
  meta_input.n = n;
  for (const auto& slice : plan->train_slices) {
    std::vector<LabeledPoint> pts(tasks[slice.task].points.begin() + slice.begin,
                                  tasks[slice.task].points.begin() + slice.end);
    meta_input.tasks.emplace_back(std::move(pts), d);
  }

  const LinearRep rep = metalearn(meta_input);

  std::vector<TaskClassifier> out;
  out.reserve(t);
  for (const auto& slice : plan->spec_slices) {
    std::vector<LabeledPoint> pts(tasks[slice.task].points.begin() + slice.begin,
                                  tasks[slice.task].points.begin() + slice.end);
    Halfspace f = specialize(rep, TaskDataset(std::move(pts), d));
    out.emplace_back([rep, f](const Vec& x) { return f.classify(rep.B.apply(x)); });
  }
  return out;
}

}  // namespace replearn
