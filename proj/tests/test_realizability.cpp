#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "replearn/realizability.hpp"
#include "replearn/rng.hpp"

using namespace replearn;

namespace {

RepDataset make1d(std::initializer_list<std::pair<double, int>> pts) {
  std::vector<RepPoint> v;
  for (const auto& [z, y] : pts) v.push_back({{z}, y});
  return RepDataset(std::move(v), 1);
}

// Independent 1-d oracle: exhausts every behavior of sign(a z - w) by trying
// a in {-1, 0, +1} and w over all data values, midpoints, and sentinels
// beyond the extremes (error only changes at data values).
bool grid_separable_1d(const RepDataset& d) {
  for (double a : {-1.0, 0.0, 1.0}) {
    std::vector<double> keys;
    for (const auto& p : d.points) keys.push_back(a * p.z[0]);
    std::sort(keys.begin(), keys.end());
    std::vector<double> cands{keys.front() - 1.0, keys.back() + 1.0, -1.0, 1.0};
    for (std::size_t i = 0; i < keys.size(); ++i) {
      cands.push_back(keys[i]);
      if (i + 1 < keys.size()) cands.push_back(0.5 * (keys[i] + keys[i + 1]));
    }
    for (double w : cands) {
      bool all = true;
      for (const auto& p : d.points)
        if (sign_pm(a * p.z[0] - w) != p.y) {
          all = false;
          break;
        }
      if (all) return true;
    }
  }
  return false;
}

// Independent exact minimum error for k = 1 and small n: maximizes accuracy
// over all flip vectors whose flipped dataset the grid oracle accepts.
double enumerate_min_error_1d(const RepDataset& d) {
  const std::size_t n = d.size();
  double best = 1.0;
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    RepDataset flipped = d;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((bits >> i) & 1) {
        ++correct;
      } else {
        flipped.points[i].y = -flipped.points[i].y;
      }
    }
    if (grid_separable_1d(flipped))
      best = std::min(best, 1.0 - static_cast<double>(correct) / n);
  }
  return best;
}

RepDataset random_rep(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<RepPoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({rng.gaussian_vec(k), rng.next_bernoulli(0.5) ? +1 : -1});
  return RepDataset(std::move(pts), k);
}

}  // namespace

TEST_CASE("is_separable on hand-checked 1-d patterns") {
  // Oracle-derived expectations, frozen: the +,-,+ pattern defeats every
  // threshold orientation; a single sign change does not.
  CHECK(grid_separable_1d(make1d({{0, +1}, {1, -1}, {2, +1}})) == false);
  CHECK(grid_separable_1d(make1d({{0, -1}, {1, +1}})) == true);
  CHECK(grid_separable_1d(make1d({{0, +1}, {0, -1}})) == false);

  CHECK(is_separable(make1d({{0, +1}, {1, -1}, {2, +1}})) == false);
  CHECK(is_separable(make1d({{0, -1}, {1, +1}})) == true);
  CHECK(is_separable(make1d({{0, +1}, {0, -1}})) == false);
}

TEST_CASE("datasets with one label are separable") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + rng.next_index(3);
    RepDataset d = random_rep(rng, 1 + rng.next_index(6), k);
    const int y = rng.next_bernoulli(0.5) ? +1 : -1;
    for (auto& p : d.points) p.y = y;
    CHECK(is_separable(d));
  }
}

TEST_CASE("is_separable_1d matches the hand-checked cases") {
  CHECK(is_separable_1d(make1d({{0, +1}, {1, -1}, {2, +1}})) == false);
  CHECK(is_separable_1d(make1d({{5, +1}})) == true);
  CHECK(is_separable_1d(make1d({{0, +1}, {0, -1}})) == false);
}

TEST_CASE("oracle agreement for k = 1: subset oracle, sort oracle, zero error") {
  Rng rng(17);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.next_index(7);
    RepDataset d = random_rep(rng, n, 1);
    // Mix in collisions so ties are exercised.
    if (n >= 2 && rng.next_bernoulli(0.3)) d.points[1].z = d.points[0].z;
    const bool a = is_separable(d);
    const bool b = is_separable_1d(d);
    const bool c = best_halfspace(d).error == 0.0;
    REQUIRE(a == b);
    REQUIRE(a == c);
  }
}

TEST_CASE("monotone_realizable follows the ordering predicate") {
  CHECK(monotone_realizable(make1d({{2, +1}, {1, -1}})) == Verdict::realizable);
  CHECK(monotone_realizable(make1d({{1, +1}, {2, -1}})) == Verdict::nonrealizable);
  // Coincident opposite labels: w would need z- < w <= z+ with z- = z+.
  CHECK(monotone_realizable(make1d({{1, +1}, {1, -1}})) == Verdict::nonrealizable);
  CHECK(monotone_realizable(make1d({{4, +1}, {9, +1}})) == Verdict::realizable);
}

TEST_CASE("extract_certificate returns small nonrealizable cores") {
  // Oracle: check the returned subset against the grid oracle directly.
  RepDataset d = make1d({{0, +1}, {1, -1}, {2, +1}, {3, -1}});
  Certificate cert = extract_certificate(d, Family::halfspace);
  CHECK(cert.size_bound == 3);  // k + 2
  REQUIRE(cert.indices.size() <= 3);
  std::vector<RepPoint> sub;
  for (auto i : cert.indices) sub.push_back(d.points[i]);
  CHECK(!grid_separable_1d(RepDataset(std::move(sub), 1)));

  // Monotone family: the only out-of-order opposite-label pair survives.
  RepDataset m = make1d({{1, +1}, {2, -1}, {3, +1}});
  Certificate mc = extract_certificate(m, Family::monotone);
  CHECK(mc.size_bound == 2);
  CHECK(mc.indices == std::vector<std::size_t>{0, 1});

  CHECK_THROWS_AS(extract_certificate(make1d({{0, -1}, {1, +1}}), Family::halfspace),
                  PreconditionViolated);
}

TEST_CASE("certificates are valid on random nonrealizable inputs") {
  Rng rng(29);
  for (std::size_t k : {std::size_t{1}, std::size_t{2}}) {
    int found = 0;
    while (found < 150) {
      RepDataset d = random_rep(rng, 4 + rng.next_index(7), k);
      if (family_realizable(d, Family::halfspace)) continue;
      ++found;
      Certificate cert = extract_certificate(d, Family::halfspace);
      REQUIRE(cert.indices.size() <= k + 2);
      std::vector<RepPoint> sub;
      for (auto i : cert.indices) sub.push_back(d.points[i]);
      CHECK(!is_separable(RepDataset(std::move(sub), k)));
    }
  }
}

TEST_CASE("realizability_predicate composes projection and the oracle") {
  TaskDataset task({LabeledPoint({0, 9}, +1), LabeledPoint({1, -9}, -1),
                    LabeledPoint({2, 9}, +1)},
                   2);
  Matrix b1(1, 2);
  b1(0, 0) = 1.0;
  CHECK(realizability_predicate(LinearRep(b1), task, Family::halfspace) ==
        Verdict::nonrealizable);
  Matrix b2(1, 2);
  b2(0, 1) = 1.0;
  CHECK(realizability_predicate(LinearRep(b2), task, Family::halfspace) ==
        Verdict::realizable);
}

TEST_CASE("empirical_error matches the labeling-enumeration oracle (k = 1)") {
  // Frozen hand case first: +,-,+ needs exactly one flip out of three.
  RepDataset d = make1d({{0, +1}, {1, -1}, {2, +1}});
  CHECK(enumerate_min_error_1d(d) == doctest::Approx(1.0 / 3.0));
  CHECK(best_halfspace(d).error == doctest::Approx(1.0 / 3.0));

  CHECK(best_halfspace(make1d({{7, +1}})).error == 0.0);

  Rng rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng.next_index(9);
    RepDataset r = random_rep(rng, n, 1);
    if (n >= 2 && rng.next_bernoulli(0.3)) r.points[1].z = r.points[0].z;
    const double expect = enumerate_min_error_1d(r);
    const double got = best_halfspace(r).error;
    REQUIRE(got == doctest::Approx(expect).epsilon(1e-12));
    REQUIRE(std::fabs(got * n - std::round(got * n)) < 1e-9);
  }
}

TEST_CASE("best_halfspace witness attains its reported error") {
  Rng rng(37);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.next_index(2);
    const std::size_t n = 1 + rng.next_index(8);
    RepDataset d = random_rep(rng, n, k);
    ErmResult r = best_halfspace(d);
    std::size_t wrong = 0;
    for (const auto& p : d.points)
      if (r.classifier.classify(p.z) != p.y) ++wrong;
    REQUIRE(static_cast<double>(wrong) / n == doctest::Approx(r.error).epsilon(1e-12));
    // The flip vector marks exactly the correctly classified points.
    REQUIRE(r.flips.sigma.size() == n);
    REQUIRE(r.flips.correct_fraction() == doctest::Approx(1.0 - r.error).epsilon(1e-12));
  }
}

namespace {

// Independent separability oracle for k = 2: the dataset is nonseparable
// exactly when 0 lies in the convex hull of the augmented rows, witnessed in
// general position by a 4-subset with nonnegative barycentric weights.
bool hull_separable_k2(const RepDataset& data) {
  const AugMatrix aug = augment(data);
  const std::size_t n = data.size();
  if (n < 4) return true;
  const bool contains_zero =
      replearn::detail::for_each_combination(n, 4, [&](std::span<const std::size_t> idx) {
        Matrix sys(4, 4);
        for (std::size_t c = 0; c < 4; ++c) {
          for (std::size_t r = 0; r < 3; ++r) sys(r, c) = aug.z(idx[c], r);
          sys(3, c) = 1.0;
        }
        LinSolve sol = gaussian_solve(std::move(sys), Vec{0.0, 0.0, 0.0, 1.0});
        if (!sol.ok) return false;
        for (double l : sol.x)
          if (l < -1e-9) return false;
        return true;
      });
  return !contains_zero;
}

// Exact minimum error for k = 2 by exhausting flip vectors against the hull
// oracle; independent of the tight-subset ERM it cross-checks.
double enumerate_min_error_k2(const RepDataset& d) {
  const std::size_t n = d.size();
  double best = 1.0;
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    RepDataset flipped = d;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((bits >> i) & 1) {
        ++correct;
      } else {
        flipped.points[i].y = -flipped.points[i].y;
      }
    }
    if (hull_separable_k2(flipped))
      best = std::min(best, 1.0 - static_cast<double>(correct) / n);
  }
  return best;
}

}  // namespace

TEST_CASE("empirical_error matches the hull-oracle enumeration (k = 2)") {
  Rng rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_index(6);
    RepDataset d = random_rep(rng, n, 2);
    const double expect = enumerate_min_error_k2(d);
    const double got = best_halfspace(d).error;
    REQUIRE(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("planar XOR needs the full k+2 certificate") {
  // Every 3 of the 4 points are in general position and hence realizable, so
  // greedy deletion cannot drop anything: the certificate is the whole set.
  RepDataset xor4({{{0, 0}, +1}, {{1, 1}, +1}, {{0, 1}, -1}, {{1, 0}, -1}}, 2);
  REQUIRE(!is_separable(xor4));
  CHECK(best_halfspace(xor4).error == doctest::Approx(0.25));
  Certificate cert = extract_certificate(xor4, Family::halfspace);
  CHECK(cert.indices == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("monotone certificates are pairs on random nonrealizable inputs") {
  Rng rng(59);
  int found = 0;
  while (found < 100) {
    RepDataset d = random_rep(rng, 3 + rng.next_index(6), 1);
    if (monotone_realizable(d) == Verdict::realizable) continue;
    ++found;
    Certificate cert = extract_certificate(d, Family::monotone);
    REQUIRE(cert.indices.size() <= 2);
    std::vector<RepPoint> sub;
    for (auto i : cert.indices) sub.push_back(d.points[i]);
    CHECK(monotone_realizable(RepDataset(std::move(sub), 1)) == Verdict::nonrealizable);
  }
}

TEST_CASE("realizable datasets stay realizable on every subset") {
  Rng rng(41);
  int checked = 0;
  while (checked < 60) {
    const std::size_t k = 1 + rng.next_index(2);
    RepDataset d = random_rep(rng, 2 + rng.next_index(5), k);
    if (!is_separable(d)) continue;
    ++checked;
    const std::size_t n = d.size();
    for (std::size_t bits = 1; bits < (std::size_t{1} << n); ++bits) {
      std::vector<RepPoint> sub;
      for (std::size_t i = 0; i < n; ++i)
        if ((bits >> i) & 1) sub.push_back(d.points[i]);
      CHECK(is_separable(RepDataset(std::move(sub), k)));
    }
  }
}

TEST_CASE("GL invariance: invertible reparametrizations change nothing") {
  Rng rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 1 + rng.next_index(2), d = k + rng.next_index(3);
    Matrix b(k, d);
    for (auto& v : b.a) v = rng.next_gaussian();
    LinearRep rep{b};

    Matrix m(k, k);
    do {
      for (auto& v : m.a) v = rng.next_gaussian();
    } while (!rows_independent(m));
    LinearRep rep2{matmul(m, b)};

    std::vector<LabeledPoint> pts;
    const std::size_t n = 1 + rng.next_index(7);
    for (std::size_t i = 0; i < n; ++i)
      pts.emplace_back(rng.gaussian_vec(d), rng.next_bernoulli(0.5) ? 1 : -1);
    TaskDataset task(std::move(pts), d);

    CHECK(realizability_predicate(rep, task, Family::halfspace) ==
          realizability_predicate(rep2, task, Family::halfspace));
    CHECK(empirical_error(rep, task) ==
          doctest::Approx(empirical_error(rep2, task)).epsilon(1e-12));
  }
}

TEST_CASE("k + 1 points in general position are always realizable") {
  Rng rng(47);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 1 + rng.next_index(2);
    RepDataset d = random_rep(rng, k + 1, k);
    CHECK(is_separable(d));
  }
}

TEST_CASE("conflicting duplicates floor the empirical error") {
  RepDataset d = make1d({{1, +1}, {1, -1}, {2, +1}, {3, -1}});
  // One coincident opposite-label pair forces at least one mistake.
  CHECK(best_halfspace(d).error >= doctest::Approx(0.25));
}
