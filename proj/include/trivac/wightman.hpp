#pragma once

#include <cmath>
#include <vector>

#include "trivac/common.hpp"

namespace trivac {

/// Free scalar field in 3+1 dimensions with an i-epsilon regulator and a
/// regulator ladder for extrapolation to epsilon -> 0.
struct FieldSpec {
  double mass = 0.0;
  double eps_reg = 1e-2;          ///< regulator used for direct evaluation
  std::vector<double> ladder{};   ///< strictly decreasing regulators; empty
                                  ///< means single evaluation at eps_reg
};

inline void validate_field(const FieldSpec& f) {
  if (f.mass < 0.0) throw ConfigError("field: mass must be >= 0");
  if (!(f.eps_reg > 0.0)) throw ConfigError("field: regulator must be > 0");
  for (std::size_t k = 1; k < f.ladder.size(); ++k)
    if (!(f.ladder[k] < f.ladder[k - 1]))
      throw ConfigError("field: regulator ladder must be strictly decreasing");
  for (double e : f.ladder)
    if (!(e > 0.0)) throw ConfigError("field: ladder entries must be > 0");
}

namespace detail {

/// Modified Bessel K1 for complex argument on the principal branch.
/// Power series with digamma terms for moderate |z|, the large-argument
/// asymptotic expansion beyond.
inline cplx bessel_k1(cplx z) {
  const double az = std::abs(z);
  if (az == 0.0) throw NumericalError("bessel_k1: argument is zero");
  if (az <= 7.0) {
    // K1(z) = 1/z + ln(z/2) I1(z) - (z/4) sum [psi(k+1)+psi(k+2)] t_k
    // with t_k = (z^2/4)^k / (k! (k+1)!).
    const cplx q = 0.25 * z * z;
    const double euler_gamma = 0.57721566490153286;
    cplx i1_sum(0.0, 0.0);
    cplx psi_sum(0.0, 0.0);
    cplx t(1.0, 0.0);  // t_0
    double psi1 = -euler_gamma;         // psi(1)
    double psi2 = 1.0 - euler_gamma;    // psi(2)
    for (int k = 0; k < 60; ++k) {
      i1_sum += t;
      psi_sum += (psi1 + psi2) * t;
      if (std::abs(t) < 1e-18 * (std::abs(i1_sum) + 1.0)) break;
      t *= q / (static_cast<double>(k + 1) * (k + 2));
      psi1 += 1.0 / (k + 1);
      psi2 += 1.0 / (k + 2);
    }
    const cplx i1 = 0.5 * z * i1_sum;
    return 1.0 / z + std::log(0.5 * z) * i1 - 0.25 * z * psi_sum;
  }
  // K1(z) ~ sqrt(pi/2z) e^{-z} sum a_k, a_0 = 1,
  // a_k = a_{k-1} (4 - (2k-1)^2) / (8 k z).
  cplx sum(1.0, 0.0);
  cplx a(1.0, 0.0);
  for (int k = 1; k <= 24; ++k) {
    a *= (4.0 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * z);
    if (std::abs(a) > 1.0) break;  // asymptotic series started diverging
    sum += a;
    if (std::abs(a) < 1e-17 * std::abs(sum)) break;
  }
  return std::sqrt(pi / (2.0 * z)) * std::exp(-z) * sum;
}

}  // namespace detail

/// Regulated vacuum two-point function W(r, dt) of the free field at spatial
/// separation r and time difference dt (first operator later by dt).
inline cplx wightman_regulated(double mass, double r, double dt,
                               double eps_reg) {
  if (r < 0.0) throw ConfigError("wightman: r must be >= 0");
  if (mass < 0.0) throw ConfigError("wightman: mass must be >= 0");
  if (r == 0.0 && eps_reg == 0.0)
    throw ConfigError("wightman: r = 0 needs a nonzero regulator");
  const cplx tau(dt, -eps_reg);
  const cplx s2 = r * r - tau * tau;
  if (mass == 0.0) return 1.0 / (4.0 * pi * pi * s2);
  const cplx s = std::sqrt(s2);  // principal branch
  return mass / (4.0 * pi * pi * s) * detail::bessel_k1(mass * s);
}

inline cplx wightman(const FieldSpec& field, double r, double dt) {
  validate_field(field);
  return wightman_regulated(field.mass, r, dt, field.eps_reg);
}

}  // namespace trivac
