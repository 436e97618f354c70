#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "trivac/common.hpp"

namespace trivac {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes by Newton iteration on P_n; cached per order. Deterministic.
inline const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess for the i-th root (descending).
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(x) and P_n'(x) by upward recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

namespace detail {
inline double quad_abs(double v) { return std::abs(v); }
inline double quad_abs(const cplx& v) { return std::abs(v); }
}  // namespace detail

template <class T>
struct QuadResult {
  T value{};
  double rel_resid = 0.0;  ///< |last refinement change| / scale
  double l1 = 0.0;         ///< integral of |f| at the final level
  int panels = 0;
  bool converged = true;
};

/// Composite fixed-order Gauss-Legendre over `panels` equal panels.
template <class T, class F>
QuadResult<T> integrate_panels(F&& f, double a, double b, int panels,
                               int order = 16) {
  const GaussRule& g = gauss_legendre(order);
  QuadResult<T> out;
  out.panels = panels;
  const double h = (b - a) / panels;
  T sum{};
  double l1 = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int q = 0; q < order; ++q) {
      T v = f(mid + 0.5 * h * g.nodes[q]);
      sum += (0.5 * h * g.weights[q]) * v;
      l1 += 0.5 * h * g.weights[q] * detail::quad_abs(v);
    }
  }
  out.value = sum;
  out.l1 = l1;
  return out;
}

/// Dyadic panel refinement until successive composite estimates agree to
/// rel_tol. The convergence scale mixes |I| with a small multiple of the L1
/// mass so heavily cancelling integrals do not demand absurd relative
/// accuracy; both scale linearly with the integrand, which keeps refinement
/// decisions invariant under overall rescaling.
template <class T, class F>
QuadResult<T> integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                 int init_panels = 2, int max_panels = 1024,
                                 int order = 16) {
  if (!(b > a)) return QuadResult<T>{};
  int p = std::min(std::max(1, init_panels), max_panels);
  QuadResult<T> prev = integrate_panels<T>(f, a, b, p, order);
  while (true) {
    if (2 * p > max_panels) {
      prev.converged = false;
      return prev;
    }
    p *= 2;
    QuadResult<T> cur = integrate_panels<T>(f, a, b, p, order);
    const double diff = detail::quad_abs(cur.value - prev.value);
    const double scale =
        std::max(detail::quad_abs(cur.value), 1e-3 * cur.l1);
    cur.rel_resid = (scale > 0.0) ? diff / scale : 0.0;
    if (diff <= rel_tol * scale) return cur;
    prev = cur;
  }
}

/// Panel count so that an oscillation of `freq` rad/time over [a, b] gets at
/// least `nodes_per_period` nodes.
inline int panels_for_oscillation(double a, double b, double freq,
                                  double nodes_per_period = 8.0,
                                  int order = 16) {
  const double periods = (b - a) * freq / (2.0 * pi);
  const int nodes = static_cast<int>(std::ceil(periods * nodes_per_period));
  return std::max(2, (nodes + order - 1) / order);
}

}  // namespace trivac
