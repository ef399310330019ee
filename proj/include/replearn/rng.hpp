#pragma once

#include <cmath>
#include <cstdint>

#include "replearn/matrix.hpp"

namespace replearn {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-style deterministic RNG. Streams are derived by hashing tags into
/// the key, so a stream is a pure function of (seed, tag chain) and is
/// independent of scheduling or evaluation order elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(detail::mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  /// Child stream for a sub-object (task index, point index, restart, ...).
  Rng derive(std::uint64_t tag) const {
    Rng child(0);
    child.key_ = detail::mix64(key_ ^ detail::mix64(tag ^ 0xd6e8feb86659fd93ULL));
    child.ctr_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one draw per call, cosine branch).
  double next_gaussian() {
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Uniform index in [0, n). Modulo bias is far below anything observable
  /// at the sample sizes used here.
  std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  bool next_bernoulli(double p) { return next_unit() < p; }

  Vec gaussian_vec(std::size_t n) {
    Vec v(n);
    for (auto& x : v) x = next_gaussian();
    return v;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
};

}  // namespace replearn
