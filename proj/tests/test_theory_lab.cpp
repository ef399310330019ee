#include <doctest.h>

#include <cmath>

#include "replearn/theory_lab.hpp"

using namespace replearn;

namespace {

DiscreteDist dist1d(std::initializer_list<std::tuple<double, int, double>> atoms) {
  std::vector<Atom> v;
  for (const auto& [z, y, p] : atoms) v.push_back({{z}, y, p});
  return DiscreteDist(std::move(v), 1);
}

// Random 1-d atom distribution with forced label conflicts so the best error
// is bounded away from zero often enough.
DiscreteDist random_dist(Rng& rng, bool with_conflicts) {
  const std::size_t values = 2 + rng.next_index(4);
  std::vector<Atom> atoms;
  Vec raw;
  for (std::size_t i = 0; i < values; ++i) {
    const double z = rng.next_gaussian();
    const bool both = with_conflicts && rng.next_bernoulli(0.6);
    atoms.push_back({{z}, rng.next_bernoulli(0.5) ? +1 : -1, 0.0});
    raw.push_back(0.05 + rng.next_unit());
    if (both) {
      atoms.push_back({{z}, -atoms.back().y, 0.0});
      raw.push_back(0.05 + rng.next_unit());
    }
  }
  double sum = 0.0;
  for (double w : raw) sum += w;
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i].prob = raw[i] / sum;
  // Exact renormalization within 1e-12.
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) acc += atoms[i].prob;
  atoms.back().prob = 1.0 - acc;
  return DiscreteDist(std::move(atoms), 1);
}

}  // namespace

TEST_CASE("exact_err on two-atom monotone cases") {
  // Region-by-region check: ordered wrongly -> 1/2, ordered correctly -> 0.
  CHECK(exact_err(dist1d({{0, +1, 0.5}, {1, -1, 0.5}}), Family::monotone) ==
        doctest::Approx(0.5));
  CHECK(exact_err(dist1d({{0, -1, 0.5}, {1, +1, 0.5}}), Family::monotone) == 0.0);
  CHECK(exact_err(dist1d({{3, +1, 1.0}}), Family::monotone) == 0.0);
}

TEST_CASE("exact_pnr: coin-flip pair is nonrealizable half the time") {
  DiscreteDist coin = dist1d({{0, +1, 0.5}, {0, -1, 0.5}});
  PnrEstimate p = exact_pnr(coin, Family::monotone, 2);
  CHECK(p.exact);
  CHECK(p.value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("exact_pnr: realizable support gives zero, m = 1 gives zero") {
  DiscreteDist ordered = dist1d({{0, -1, 0.25}, {1, +1, 0.75}});
  CHECK(exact_pnr(ordered, Family::monotone, 3).value == 0.0);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteDist d = random_dist(rng, true);
    CHECK(exact_pnr(d, Family::monotone, 1).value == 0.0);
    CHECK(exact_pnr(d, Family::halfspace, 1).value == 0.0);
  }
}

TEST_CASE("pnr_lower_bound evaluates the closed form") {
  // 0.5 * (2 * 0.5 / (16 e * 2 * ln 32))^2, checked by direct evaluation.
  const double e = 2.718281828459045235;
  const double expected = 0.5 * std::pow(1.0 / (32.0 * e * std::log(32.0)), 2.0);
  CHECK(pnr_lower_bound(0.5, 2, 1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(pnr_lower_bound(0.0, 2, 1), InvalidInput);

  // Monotone decrease toward zero as err shrinks.
  double prev = pnr_lower_bound(0.5, 2, 1);
  for (double err : {0.3, 0.1, 0.03, 0.01}) {
    const double v = pnr_lower_bound(err, 2, 1);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("nonrealizability floor holds on constructed distributions") {
  // The F_mon bound with m = 2 (vc = 1) and the 1-d halfspace bound with
  // m = 3 (vc = 2), all on the exact enumeration path.
  Rng rng(11);
  int done = 0;
  while (done < 60) {
    DiscreteDist d = random_dist(rng, true);
    const double err_mon = exact_err(d, Family::monotone);
    if (err_mon > 0.0) {
      const double p = exact_pnr(d, Family::monotone, 2).value;
      REQUIRE(p >= pnr_lower_bound(err_mon, 2, 1) - 1e-12);
    }
    const double err_hs = exact_err(d, Family::halfspace);
    if (err_hs > 0.0) {
      const double p = exact_pnr(d, Family::halfspace, 3).value;
      REQUIRE(p >= pnr_lower_bound(err_hs, 3, 2) - 1e-12);
    }
    ++done;
  }
}

TEST_CASE("check_mon_bound: coin flip and random distributions pass") {
  MonBoundReport coin = check_mon_bound(dist1d({{0, +1, 0.5}, {0, -1, 0.5}}));
  CHECK(coin.err_sq == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(coin.pnr == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(coin.pass);

  CHECK(check_mon_bound(dist1d({{0, -1, 0.5}, {1, +1, 0.5}})).pass);

  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    CHECK(check_mon_bound(random_dist(rng, true)).pass);
    CHECK(check_mon_bound(random_dist(rng, false)).pass);
  }
}

TEST_CASE("exact_pnr enumeration agrees with an independent sampler") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    DiscreteDist d = random_dist(rng, true);
    const double exact = exact_pnr(d, Family::monotone, 2).value;
    Rng s(1000 + trial);
    std::size_t hits = 0;
    const std::size_t draws = 20000;
    Vec cdf;
    double acc = 0.0;
    for (const auto& a : d.atoms) cdf.push_back(acc += a.prob);
    cdf.back() = 1.0;
    for (std::size_t it = 0; it < draws; ++it) {
      std::vector<RepPoint> pts;
      for (int j = 0; j < 2; ++j) {
        const double u = s.next_unit();
        std::size_t i = 0;
        while (cdf[i] < u) ++i;
        pts.push_back({d.atoms[i].z, d.atoms[i].y});
      }
      if (monotone_realizable(RepDataset(std::move(pts), 1)) == Verdict::nonrealizable)
        ++hits;
    }
    const double est = static_cast<double>(hits) / draws;
    const double se = std::sqrt(est * (1 - est) / draws) + 1e-9;
    CHECK(std::fabs(est - exact) <= 4.0 * se);
  }
}

TEST_CASE("exact_pnr switches to Monte-Carlo above the enumeration cap") {
  // Four coincident atoms, half positive: an m-tuple is realizable iff all
  // labels agree, so p_nr(m) = 1 - 2^(1-m) in closed form. With m = 11 the
  // tuple count 4^11 exceeds the cap and the MC path must be taken.
  DiscreteDist d = dist1d({{0, +1, 0.25}, {0, +1, 0.25}, {0, -1, 0.25}, {0, -1, 0.25}});
  PnrEstimate p = exact_pnr(d, Family::monotone, 11, /*mc_seed=*/3, /*mc_draws=*/40000);
  CHECK(!p.exact);
  CHECK(p.stderr_ > 0.0);
  const double closed_form = 1.0 - std::pow(2.0, -10.0);
  CHECK(std::fabs(p.value - closed_form) <= 4.0 * p.stderr_);

  // Partitioning draws across workers does not change the tally.
  PnrEstimate p4 = exact_pnr(d, Family::monotone, 11, 3, 40000, /*mc_threads=*/4);
  CHECK(p4.value == p.value);
}

TEST_CASE("vc_witness realizes every labeling at the feasible corner cases") {
  // t <= k: witness size t(d+1).
  for (auto [t, d, k] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 1, 1},
                         {2, 1, 2},
                         {1, 2, 2},
                         {1, 3, 1},
                         {3, 1, 3}}) {
    WitnessReport rep = vc_witness(t, d, k);
    CHECK(rep.witness_size == t * (d + 1));
    CHECK(rep.all_realized);
  }
  // t > k: witness size t(k+1).
  for (auto [t, d, k] : {std::tuple<std::size_t, std::size_t, std::size_t>{2, 1, 1},
                         {3, 2, 1},
                         {2, 2, 2}}) {
    WitnessReport rep = vc_witness(t, d, k);
    CHECK(rep.witness_size == t * (k + 1));
    CHECK(rep.all_realized);
  }
  CHECK_THROWS_AS(vc_witness(5, 5, 5), InvalidInput);  // over the cap
}

TEST_CASE("finite_vc and finite_nrc on the three constructions") {
  for (std::size_t ell : {std::size_t{3}, std::size_t{4}, std::size_t{5}}) {
    FiniteClass points = point_function_class(ell);
    CHECK(finite_vc(points) == 1);
    CHECK(finite_nrc(points) == ell);

    FiniteClass with_const = point_function_class_with_constant(ell);
    CHECK(finite_vc(with_const) == 1);
    CHECK(finite_nrc(with_const) == 2);  // adding a function SHRINKS the certificates

    FiniteClass pinned = pinned_origin_class(ell);
    CHECK(finite_vc(pinned) == ell);
    CHECK(finite_nrc(pinned) == 2);
  }
}

namespace {

bool set_realizable(std::uint32_t set, const FiniteClass& cls) {
  for (const auto& f : cls.functions) {
    bool ok = true;
    for (std::size_t x = 0; x < cls.domain && ok; ++x) {
      if ((set >> (2 * x)) & 1) ok = f[x] == +1;
      if (ok && ((set >> (2 * x + 1)) & 1)) ok = f[x] == -1;
    }
    if (ok) return true;
  }
  return false;
}

// Straight from the definition: the worst minimum nonrealizable-subset size
// over all nonrealizable labeled sets. Quadratic in the subset lattice, so
// only for tiny domains; cross-checks the minimal-set reformulation used by
// finite_nrc.
std::size_t nrc_by_definition(const FiniteClass& cls) {
  const std::size_t bits = 2 * cls.domain;
  std::size_t worst = 0;
  for (std::uint32_t set = 1; set < (1u << bits); ++set) {
    if (set_realizable(set, cls)) continue;
    std::size_t best = __builtin_popcount(set);
    for (std::uint32_t sub = set; sub; sub = (sub - 1) & set)
      if (!set_realizable(sub, cls))
        best = std::min<std::size_t>(best, __builtin_popcount(sub));
    worst = std::max(worst, best);
  }
  return worst;
}

FiniteClass random_finite_class(Rng& rng) {
  const std::size_t domain = 2 + rng.next_index(4);
  const std::size_t count = 1 + rng.next_index(10);
  std::vector<std::vector<int>> fns;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<int> f(domain);
    for (auto& v : f) v = rng.next_bernoulli(0.5) ? +1 : -1;
    fns.push_back(std::move(f));
  }
  return FiniteClass(domain, std::move(fns));
}

}  // namespace

TEST_CASE("finite_nrc matches the definitional oracle") {
  for (std::size_t ell : {std::size_t{2}, std::size_t{3}}) {
    CHECK(finite_nrc(point_function_class(ell)) ==
          nrc_by_definition(point_function_class(ell)));
    CHECK(finite_nrc(point_function_class_with_constant(ell)) ==
          nrc_by_definition(point_function_class_with_constant(ell)));
    CHECK(finite_nrc(pinned_origin_class(ell)) ==
          nrc_by_definition(pinned_origin_class(ell)));
  }
  Rng rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    FiniteClass cls = random_finite_class(rng);
    REQUIRE(finite_nrc(cls) == nrc_by_definition(cls));
  }
}

TEST_CASE("finite classes obey vc <= log2 |F| and nrc <= |F|") {
  Rng rng(71);
  for (int trial = 0; trial < 60; ++trial) {
    FiniteClass cls = random_finite_class(rng);
    const double log2f = std::log2(static_cast<double>(cls.functions.size()));
    CHECK(static_cast<double>(finite_vc(cls)) <= log2f + 1e-12);
    CHECK(finite_nrc(cls) <= cls.functions.size());
  }
}

TEST_CASE("finite_vc saturates on the full class") {
  std::vector<std::vector<int>> all;
  for (std::size_t bits = 0; bits < 8; ++bits) {
    std::vector<int> f(3, -1);
    for (std::size_t x = 0; x < 3; ++x)
      if ((bits >> x) & 1) f[x] = +1;
    all.push_back(std::move(f));
  }
  FiniteClass full(3, std::move(all));
  CHECK(finite_vc(full) == 3);
  CHECK(finite_nrc(full) == 2);  // only contradictory pairs are nonrealizable
}

TEST_CASE("DiscreteDist validates probabilities") {
  CHECK_THROWS_AS(dist1d({{0, +1, 0.5}, {1, -1, 0.6}}), InvalidInput);
  CHECK_THROWS_AS(dist1d({{0, +1, -0.1}, {1, -1, 1.1}}), InvalidInput);
  CHECK(dist1d({{0, +1, 0.25}, {1, -1, 0.75}}).rho() == doctest::Approx(0.25));
}

TEST_CASE("finite classes enforce the exhaustive-search cap") {
  CHECK_THROWS_AS(point_function_class(13), InvalidInput);
  CHECK_THROWS_AS(FiniteClass(0, {{+1}}), InvalidInput);
}
