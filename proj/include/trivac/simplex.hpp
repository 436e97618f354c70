#pragma once

#include <Eigen/Dense>
#include <vector>

#include "trivac/common.hpp"

namespace trivac {

/// Dense two-phase tableau simplex for   min c.x  s.t.  A x = b, x >= 0.
/// Sized for small exact polytopes (here: 64 rows, a few thousand columns).
/// Dantzig pricing with a Bland fallback against cycling. On infeasibility
/// the phase-1 duals y form a Farkas certificate: y.A_j <= 0 for every
/// column while y.b > 0.
struct LpResult {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::optimal;
  double objective = 0.0;       ///< phase-2 objective (or phase-1 infeasibility)
  Eigen::VectorXd x;            ///< primal solution (size n)
  Eigen::VectorXd y;            ///< duals of the last phase solved (size m)
  int iterations = 0;
};

namespace detail {

struct Tableau {
  Eigen::MatrixXd t;        // m rows of B^{-1}[A | I_art], plus rhs column
  Eigen::RowVectorXd red;   // reduced costs, plus -objective in last slot
  std::vector<int> basis;   // column index of each basic variable
  int m = 0, n_total = 0;   // n_total excludes the rhs column

  void pivot(int row, int col) {
    const double piv = t(row, col);
    t.row(row) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    const double f = red(col);
    if (f != 0.0) red -= f * t.row(row);
    basis[row] = col;
  }

  /// Returns false when optimal; throws on iteration blowup via caller.
  bool step(int iter, int bland_after, double tol,
            const std::vector<bool>& allowed, bool* unbounded) {
    int enter = -1;
    if (iter < bland_after) {
      double best = -tol;
      for (int j = 0; j < n_total; ++j)
        if (allowed[j] && red(j) < best) {
          best = red(j);
          enter = j;
        }
    } else {
      for (int j = 0; j < n_total; ++j)
        if (allowed[j] && red(j) < -tol) {
          enter = j;
          break;
        }
    }
    if (enter < 0) return false;

    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = t(i, enter);
      if (a > tol) {
        const double ratio = t(i, n_total) / a;
        if (leave < 0 || ratio < best_ratio - 1e-15 ||
            (ratio < best_ratio + 1e-15 && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) {
      *unbounded = true;
      return false;
    }
    pivot(leave, enter);
    return true;
  }
};

}  // namespace detail

inline LpResult simplex_solve(const Eigen::MatrixXd& A,
                              const Eigen::VectorXd& b,
                              const Eigen::VectorXd& c, double tol = 1e-9,
                              int max_iter = 50000) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n)
    throw ConfigError("simplex_solve: dimension mismatch");

  detail::Tableau tab;
  tab.m = m;
  tab.n_total = n + m;
  tab.t.resize(m, n + m + 1);
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double s = (b(i) < 0.0) ? -1.0 : 1.0;  // keep rhs nonnegative
    tab.t.block(i, 0, 1, n) = s * A.row(i);
    tab.t.block(i, n, 1, m).setZero();
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = s * b(i);
    tab.basis[i] = n + i;
  }

  // Phase 1: minimize the artificial mass.
  tab.red.resize(n + m + 1);
  tab.red.setZero();
  for (int j = 0; j < n; ++j) tab.red(j) = -tab.t.col(j).sum();
  tab.red(n + m) = -tab.t.col(n + m).sum();  // -(current objective)

  std::vector<bool> allowed(n + m, true);
  const int bland_after = 4 * (n + m);
  LpResult res;
  bool unbounded = false;
  int iter = 0;
  while (tab.step(iter, bland_after, tol, allowed, &unbounded)) {
    if (++iter > max_iter) {
      res.status = LpResult::Status::iteration_limit;
      res.iterations = iter;
      return res;
    }
  }
  res.iterations = iter;

  // Phase-1 duals: the reduced cost of artificial i is 1 - y_i.
  res.y.resize(m);
  for (int i = 0; i < m; ++i) {
    const double s = (b(i) < 0.0) ? -1.0 : 1.0;
    res.y(i) = s * (1.0 - tab.red(n + i));
  }

  const double infeas = -tab.red(n + m);
  if (infeas > tol) {
    res.status = LpResult::Status::infeasible;
    res.objective = infeas;
    return res;
  }

  // Phase 2: swap in the real objective, lock artificials out of pricing.
  for (int j = n; j < n + m; ++j) allowed[j] = false;
  tab.red.setZero();
  for (int j = 0; j < n + m + 1; ++j) {
    double zj = 0.0;
    for (int i = 0; i < m; ++i) {
      const int bj = tab.basis[i];
      if (bj < n) zj += c(bj) * tab.t(i, j);
    }
    tab.red(j) = (j < n ? c(j) : 0.0) - zj;
  }

  while (tab.step(iter, bland_after, tol, allowed, &unbounded)) {
    if (++iter > max_iter) {
      res.status = LpResult::Status::iteration_limit;
      res.iterations = iter;
      return res;
    }
  }
  res.iterations = iter;
  if (unbounded) {
    res.status = LpResult::Status::unbounded;
    return res;
  }

  res.status = LpResult::Status::optimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tab.basis[i] < n) res.x(tab.basis[i]) = tab.t(i, n + m);
  res.objective = c.dot(res.x);
  for (int i = 0; i < m; ++i) {
    double yi = 0.0;  // phase-2 duals from the artificial columns
    for (int r = 0; r < m; ++r) {
      const int bj = tab.basis[r];
      if (bj < n) yi += c(bj) * tab.t(r, n + i);
    }
    const double s = (b(i) < 0.0) ? -1.0 : 1.0;
    res.y(i) = s * yi;
  }
  return res;
}

}  // namespace trivac
