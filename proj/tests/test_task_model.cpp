#include <doctest.h>

#include "replearn/task_model.hpp"

using namespace replearn;

namespace {

SyntheticMeta basic_meta(std::size_t k, std::size_t d, double eta, std::uint64_t seed) {
  return SyntheticMeta(random_ground_rep(k, d, seed), FeatureLaw::gaussian, eta, seed);
}

}  // namespace

TEST_CASE("noiseless tasks are realizable by the ground truth") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SyntheticMeta meta = basic_meta(1, 4, 0.0, seed);
    MetaSample s = sample_meta(meta, 25, 5);
    for (const auto& task : s.tasks) {
      CHECK(realizability_predicate(meta.b_star, task, Family::halfspace) ==
            Verdict::realizable);
      CHECK(empirical_error(meta.b_star, task) == 0.0);
    }
  }
}

TEST_CASE("noiseless points satisfy y = f*(B* x) exactly") {
  SyntheticMeta meta = basic_meta(2, 5, 0.0, 9);
  TaskHandle task = make_task(meta, stream::train, 0);
  for (std::uint64_t i = 0; i < 50; ++i) {
    LabeledPoint p = draw_point(meta, task, i);
    CHECK(task.truth.classify(meta.b_star.B.apply(p.x)) == p.y);
  }
}

TEST_CASE("noise rate 0.5 is rejected") {
  CHECK_THROWS_AS(basic_meta(1, 3, 0.5, 1), InvalidInput);
}

TEST_CASE("fixed seeds give bit-identical samples") {
  SyntheticMeta meta = basic_meta(1, 3, 0.1, 42);
  MetaSample a = sample_meta(meta, 3, 2);
  MetaSample b = sample_meta(meta, 3, 2);
  REQUIRE(a.tasks.size() == b.tasks.size());
  for (std::size_t j = 0; j < a.tasks.size(); ++j)
    for (std::size_t i = 0; i < a.tasks[j].size(); ++i) {
      CHECK(a.tasks[j].points[i].x == b.tasks[j].points[i].x);
      CHECK(a.tasks[j].points[i].y == b.tasks[j].points[i].y);
    }
}

TEST_CASE("t=1, n=1 yields one singleton dataset") {
  SyntheticMeta meta = basic_meta(1, 2, 0.0, 5);
  MetaSample s = sample_meta(meta, 1, 1);
  REQUIRE(s.tasks.size() == 1);
  CHECK(s.tasks[0].size() == 1);
}

TEST_CASE("task subsets are reproducible independently of t") {
  // Disjoint per-task streams: the first 3 tasks of a 10-task sample equal a
  // 3-task sample.
  SyntheticMeta meta = basic_meta(2, 4, 0.2, 77);
  MetaSample big = sample_meta(meta, 10, 4);
  MetaSample small = sample_meta(meta, 3, 4);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(big.tasks[j].points[i].x == small.tasks[j].points[i].x);
      CHECK(big.tasks[j].points[i].y == small.tasks[j].points[i].y);
    }
}

TEST_CASE("train and eval streams are disjoint") {
  SyntheticMeta meta = basic_meta(1, 3, 0.0, 11);
  TaskDataset train = draw_dataset(meta, make_task(meta, stream::train, 0), 3);
  TaskDataset eval = draw_dataset(meta, make_task(meta, stream::eval, 0), 3);
  bool any_diff = false;
  for (std::size_t i = 0; i < 3; ++i) any_diff |= train.points[i].x != eval.points[i].x;
  CHECK(any_diff);
}

TEST_CASE("general_position_check accepts gaussian data, rejects degeneracies") {
  SyntheticMeta meta = basic_meta(2, 4, 0.0, 13);
  for (std::uint64_t j = 0; j < 50; ++j) {
    TaskDataset task = draw_dataset(meta, make_task(meta, stream::train, j), 4);
    CHECK(general_position_check(task, 2));
  }

  TaskDataset dup = draw_dataset(meta, make_task(meta, stream::train, 0), 3);
  dup.points[1] = dup.points[0];
  CHECK(!general_position_check(dup, 2));

  std::vector<LabeledPoint> zeros(3, LabeledPoint({0, 0, 0, 0}, +1));
  CHECK(!general_position_check(TaskDataset(std::move(zeros), 4), 2));
}

TEST_CASE("uniform cube features stay in the cube") {
  SyntheticMeta meta(random_ground_rep(1, 3, 8), FeatureLaw::uniform_cube, 0.0, 8);
  TaskDataset d = draw_dataset(meta, make_task(meta, stream::train, 0), 20);
  for (const auto& p : d.points)
    for (double v : p.x) CHECK((v >= -1.0 && v <= 1.0));
}
