#pragma once

// Absolute constants and rate expressions shared by the regularization
// rules and the bound checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kronocov/errors.hpp"

namespace kronocov::theory {

/// C1 = 4e / sqrt(6 pi) ~ 2.5044
inline const double kC1 = 4.0 * std::numbers::e / std::sqrt(6.0 * std::numbers::pi);
/// C2 = e sqrt(2) ~ 3.8442
inline const double kC2 = std::numbers::e * std::numbers::sqrt2;
inline const double kC = std::max(kC1, kC2);

/// Smallest tail parameter t admissible for a covering slack eps_prime in (0, 1/2).
inline double min_t(double eps_prime) {
  if (!(eps_prime > 0.0 && eps_prime < 0.5)) {
    std::ostringstream os;
    os << "eps_prime = " << eps_prime << " must lie in (0, 1/2)";
    throw DomainError(os.str());
  }
  const double l = std::log(1.0 + 2.0 / eps_prime);
  return std::max(std::sqrt(4.0 * kC1 * l), 4.0 * kC2 * l);
}

/// (p^2 + q^2 + log M) / n with M = max(p, q, n).
inline double complexity_ratio(long p, long q, long n) {
  if (p < 1 || q < 1 || n < 1) throw DomainError("complexity_ratio: p, q, n must be positive");
  const double m = static_cast<double>(std::max({p, q, n}));
  return (double(p) * p + double(q) * q + std::log(m)) / double(n);
}

/// max{x, sqrt(x)}: the sub-exponential branch wins when x > 1.
inline double rate_shape(double x) { return std::max(x, std::sqrt(x)); }

/// C0 t / (1 - 2 eps') * max{x, sqrt(x)}, the high-probability bound on
/// ||R(S_n - Sigma_0)||_2.
inline double opnorm_rate(double c0, double t, double eps_prime, long p, long q, long n) {
  const double tmin = min_t(eps_prime);
  if (!(t >= tmin * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "t = " << t << " is below the admissible minimum " << tmin << " for eps' = " << eps_prime;
    throw DomainError(os.str());
  }
  if (!(c0 >= 0.0)) throw DomainError("C0 must be non-negative");
  return c0 * t / (1.0 - 2.0 * eps_prime) * rate_shape(complexity_ratio(p, q, n));
}

/// Nominal probability that the operator-norm bound holds: 1 - 2 M^{-t/(4C)}.
inline double opnorm_coverage(double t, long p, long q, long n) {
  const double m = static_cast<double>(std::max({p, q, n}));
  return 1.0 - 2.0 * std::pow(m, -t / (4.0 * kC));
}

}  // namespace kronocov::theory
