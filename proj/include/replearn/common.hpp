#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace replearn {

/// Bad caller input (dimension mismatch, out-of-range parameter, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was violated.
class PreconditionViolated : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// sign(0) = +1, used consistently everywhere a label is produced.
inline int sign_pm(double v) { return v >= 0.0 ? +1 : -1; }

// Relative determinant tolerance that declares a tight system singular.
inline constexpr double kRankTol = 1e-9;

// Separation slack: accept rows with z'.a >= 1 - kMarginTol.
inline constexpr double kMarginTol = 1e-7;

inline void require(bool cond, const char* msg) {
  if (!cond) throw InvalidInput(msg);
}

}  // namespace replearn
