#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "trivac/common.hpp"
#include "trivac/quadrature.hpp"
#include "trivac/wick.hpp"
#include "trivac/wightman.hpp"
#include "trivac/windows.hpp"

namespace trivac {

/// Point-like two-level detector: position, gap, coupling window.
struct DetectorSpec {
  Det id = Det::A;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double omega = 1.0;  ///< energy gap
  WindowSpec window;
};

struct PairQuad {
  double outer_rel_tol = 1e-9;
  double inner_rel_tol = 1e-11;
  int order = 16;
  int max_panels = 1024;  ///< per axis and half-range
  double nodes_per_period = 8.0;
};

/// Two-point kernel K(u) of the time difference u = t - t', plus an
/// oscillation hint for seeding panel counts.
struct PairKernel {
  std::function<cplx(double)> eval;
  double osc_hint = 0.0;
};

/// Kernel family parametrized by the regulator rung.
using KernelFactory = std::function<PairKernel(double eps_reg)>;

struct LadderValue {
  cplx value{};
  double quad_resid = 0.0;    ///< worst relative quadrature residual seen
  double extrap_resid = 0.0;  ///< relative change when the coarsest rung is
                              ///< dropped from the extrapolation
};

namespace detail {

/// One regulator rung of the smeared two-point moment
///   d = int dt int dt' e_i(t) e_j(t') exp(i a Om_i t) exp(i b Om_j t')
///       K(t - t'),
/// evaluated in difference coordinates u = t - t', v = (t + t')/2. The
/// kernel depends on u only, so all structure that needs refinement (the
/// near-lightcone behaviour of K at u ~ 0) lives on one axis; both axes use
/// composite Gauss-Legendre with dyadic panel refinement. `time_ordered`
/// restricts to u > 0 (the t > t' half).
inline QuadResult<cplx> pair_moment_rung(
    const PairKernel& ker, const WindowSpec& wi, double om_i, int alpha,
    const WindowSpec& wj, double om_j, int beta, bool time_ordered,
    const PairQuad& q) {
  const double ha = 0.5 * wi.duration;
  const double hb = 0.5 * wj.duration;
  const double mu = alpha * om_i + beta * om_j;          // v-phase rate
  const double nu = 0.5 * (alpha * om_i - beta * om_j);  // u-phase rate
  const double win_hint = window_freq_hint(wi) + window_freq_hint(wj);

  auto inner = [&](double u) -> cplx {
    const double lo = std::max(-ha - 0.5 * u, -hb + 0.5 * u);
    const double hi = std::min(ha - 0.5 * u, hb + 0.5 * u);
    if (!(hi > lo)) return cplx(0.0, 0.0);
    const int init = panels_for_oscillation(
        lo, hi, std::abs(mu) + win_hint, q.nodes_per_period, q.order);
    auto res = integrate_adaptive<cplx>(
        [&](double v) {
          return eval_window(wi, v + 0.5 * u) * eval_window(wj, v - 0.5 * u) *
                 std::exp(cplx(0.0, mu * v));
        },
        lo, hi, q.inner_rel_tol, init, q.max_panels, q.order);
    return res.value;
  };

  auto outer_f = [&](double u) -> cplx {
    return ker.eval(u) * std::exp(cplx(0.0, nu * u)) * inner(u);
  };

  const double umax = ha + hb;
  const double outer_freq = std::abs(nu) + ker.osc_hint + 0.5 * win_hint;
  const int init = std::max(
      8, panels_for_oscillation(0.0, umax, outer_freq, q.nodes_per_period,
                                q.order));

  // Always split at u = 0: the autocorrelation has a kink there and the
  // self-term kernel its near-singularity.
  auto pos = integrate_adaptive<cplx>(outer_f, 0.0, umax, 0.5 * q.outer_rel_tol,
                                      init, q.max_panels, q.order);
  QuadResult<cplx> total = pos;
  if (!time_ordered) {
    auto neg = integrate_adaptive<cplx>(outer_f, -umax, 0.0,
                                        0.5 * q.outer_rel_tol, init,
                                        q.max_panels, q.order);
    total.value = pos.value + neg.value;
    total.l1 = pos.l1 + neg.l1;
    total.panels = std::max(pos.panels, neg.panels);
    total.converged = pos.converged && neg.converged;
    const double scale = std::max(std::abs(total.value), 1e-3 * total.l1);
    total.rel_resid =
        scale > 0.0 ? (pos.rel_resid * std::abs(pos.value) +
                       neg.rel_resid * std::abs(neg.value)) /
                          scale
                    : 0.0;
  }
  return total;
}

/// Polynomial (Neville) extrapolation of rung values to regulator zero.
inline cplx extrapolate_to_zero(const std::vector<double>& eps,
                                const std::vector<cplx>& vals) {
  std::vector<cplx> t = vals;
  const std::size_t n = t.size();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i)
      t[i] = (eps[i] * t[i + 1] - eps[i + level] * t[i]) /
             (eps[i] - eps[i + level]);
  return t[0];
}

inline LadderValue ladder_eval(const KernelFactory& kernel,
                               const std::vector<double>& ladder,
                               const WindowSpec& wi, double om_i, int alpha,
                               const WindowSpec& wj, double om_j, int beta,
                               bool time_ordered, const PairQuad& q,
                               bool re_only_extrapolation) {
  LadderValue out;
  if (ladder.empty()) {
    auto res = pair_moment_rung(kernel(0.0), wi, om_i, alpha, wj, om_j, beta,
                                time_ordered, q);
    if (!res.converged)
      throw NumericalError(
          "smeared moment: quadrature did not converge at panel cap; last "
          "relative change " +
          std::to_string(res.rel_resid));
    out.value = res.value;
    out.quad_resid = res.rel_resid;
    return out;
  }

  std::vector<cplx> vals;
  vals.reserve(ladder.size());
  for (double eps : ladder) {
    auto res = pair_moment_rung(kernel(eps), wi, om_i, alpha, wj, om_j, beta,
                                time_ordered, q);
    if (!res.converged)
      throw NumericalError(
          "smeared moment: quadrature did not converge at panel cap "
          "(regulator " +
          std::to_string(eps) + ", last relative change " +
          std::to_string(res.rel_resid) + ", estimates " +
          std::to_string(res.value.real()) + " re / " +
          std::to_string(res.value.imag()) + " im)");
    out.quad_resid = std::max(out.quad_resid, res.rel_resid);
    vals.push_back(res.value);
  }

  std::vector<cplx> ext = vals;
  if (re_only_extrapolation)
    for (cplx& v : ext) v = cplx(v.real(), 0.0);
  const cplx full = extrapolate_to_zero(ladder, ext);
  out.value = re_only_extrapolation ? cplx(full.real(), vals.back().imag())
                                    : full;
  if (ladder.size() >= 2) {
    std::vector<double> eps_tail(ladder.begin() + 1, ladder.end());
    std::vector<cplx> val_tail(ext.begin() + 1, ext.end());
    const cplx alt = extrapolate_to_zero(eps_tail, val_tail);
    const double scale = std::max(std::abs(full), 1e-300);
    out.extrap_resid = std::abs(full - alt) / scale;
  }
  return out;
}

}  // namespace detail

/// Smeared two-point moment for an arbitrary kernel family, evaluated on the
/// regulator ladder and extrapolated to zero regulator. With an empty ladder
/// a single regulator-free evaluation is performed (regular kernels such as
/// finite mode sums need none).
inline LadderValue smeared_moment(const KernelFactory& kernel,
                                  const std::vector<double>& ladder,
                                  const WindowSpec& wi, double om_i, int alpha,
                                  const WindowSpec& wj, double om_j, int beta,
                                  bool time_ordered, const PairQuad& q = {}) {
  validate_window(wi);
  validate_window(wj);
  return detail::ladder_eval(kernel, ladder, wi, om_i, alpha, wj, om_j, beta,
                             time_ordered, q, /*re_only_extrapolation=*/false);
}

/// Continuum kernel family for detectors separated by r.
inline KernelFactory continuum_kernel(const FieldSpec& field, double r) {
  return [field, r](double eps) {
    const double e = eps > 0.0 ? eps : field.eps_reg;
    return PairKernel{
        [mass = field.mass, r, e](double u) {
          return wightman_regulated(mass, r, u, e);
        },
        0.0};
  };
}

/// d_{ij}^{ab}: second-order smeared amplitude between detectors i and j
/// (operator of i stands left). Ladder-extrapolated in the regulator.
inline LadderValue smeared_pair(const FieldSpec& field,
                                const DetectorSpec& det_i, int alpha,
                                const DetectorSpec& det_j, int beta,
                                const PairQuad& q = {}) {
  validate_field(field);
  validate_window(det_i.window);
  validate_window(det_j.window);
  const double r = (det_i.position - det_j.position).norm();
  std::vector<double> ladder = field.ladder;
  if (ladder.empty()) ladder = {field.eps_reg};
  return detail::ladder_eval(continuum_kernel(field, r), ladder, det_i.window,
                             det_i.omega, alpha, det_j.window, det_j.omega,
                             beta, /*time_ordered=*/false, q,
                             /*re_only_extrapolation=*/false);
}

/// Theta_i: time-ordered second-order self term (spin-down projection),
///   int_{t > t'} e(t) e(t') exp(-i Om (t - t')) W(0, t - t').
/// Its real part obeys 2 Re Theta = d_{ii}^{-+} and extrapolates cleanly;
/// the imaginary part (a level-shift phase) grows as the regulator shrinks,
/// so it is reported at the finest rung instead of extrapolated.
inline LadderValue theta_term(const FieldSpec& field,
                              const DetectorSpec& det_i,
                              const PairQuad& q = {}) {
  validate_field(field);
  validate_window(det_i.window);
  std::vector<double> ladder = field.ladder;
  if (ladder.empty()) ladder = {field.eps_reg};
  return detail::ladder_eval(continuum_kernel(field, 0.0), ladder,
                             det_i.window, det_i.omega, -1, det_i.window,
                             det_i.omega, +1, /*time_ordered=*/true, q,
                             /*re_only_extrapolation=*/true);
}

/// Theta for an arbitrary (regular) kernel family, e.g. the lattice field.
inline LadderValue theta_term_kernel(const KernelFactory& kernel,
                                     const std::vector<double>& ladder,
                                     const DetectorSpec& det_i,
                                     const PairQuad& q = {}) {
  validate_window(det_i.window);
  return detail::ladder_eval(kernel, ladder, det_i.window, det_i.omega, -1,
                             det_i.window, det_i.omega, +1,
                             /*time_ordered=*/true, q,
                             /*re_only_extrapolation=*/false);
}

/// All second-order smeared amplitudes of a three-detector configuration
/// plus the norm term C. Cross pairs are stored once in the canonical orders
/// (A,B), (B,C), (C,A); with even real windows and spacelike separations the
/// remaining orderings follow by symmetry.
struct AmplitudeSet {
  std::array<cplx, 3> emission{};     ///< d_{ii}^{-+} for i = A, B, C
  std::array<cplx, 3> exchange_pp{};  ///< d_{AB}^{++}, d_{BC}^{++}, d_{CA}^{++}
  std::array<cplx, 3> exchange_mm{};  ///< same pairs, signs --
  std::array<cplx, 3> overlap_mp{};   ///< same pairs, signs -+
  std::array<cplx, 3> theta{};        ///< Theta_A, Theta_B, Theta_C
  double norm_term = 0.0;             ///< C = 2 Re sum Theta_i

  double quad_resid_max = 0.0;
  double extrap_resid_max = 0.0;
  std::string digest;  ///< detector-configuration fingerprint

  /// Canonical cross-pair slot for an unordered pair {i, j}.
  static int cross_slot(Det i, Det j) {
    const int a = static_cast<int>(i), b = static_cast<int>(j);
    if (a == b) throw ConfigError("cross_slot: identical detectors");
    const int s = a + b;  // A+B=1, B+C=3, C+A=2
    return s == 1 ? 0 : (s == 3 ? 1 : 2);
  }

  /// Ordered pair value d_{ij}^{si sj}. Orderings away from the canonical
  /// one are filled in by the spacelike/even-window symmetries; sign
  /// combinations that never arise in the vacuum moments are rejected.
  cplx pair_value(Det i, int si, Det j, int sj) const {
    if (i == j) {
      if (si == -1 && sj == +1) return emission[static_cast<int>(i)];
      throw ConfigError(std::string("pair_value: undefined self pair d_") +
                        det_name(i) + det_name(j) + "^" +
                        (si > 0 ? "+" : "-") + (sj > 0 ? "+" : "-"));
    }
    const int slot = cross_slot(i, j);
    if (si == +1 && sj == +1) return exchange_pp[slot];
    if (si == -1 && sj == -1) return exchange_mm[slot];
    // -+ and +- coincide for spacelike pairs with even windows.
    return overlap_mp[slot];
  }
};

inline std::string detector_digest(const FieldSpec& field,
                                   const std::array<DetectorSpec, 3>& dets) {
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf, "m=%.17g;", field.mass);
  s += buf;
  for (const auto& d : dets) {
    std::snprintf(
        buf, sizeof buf,
        "%c:p=%.17g,%.17g,%.17g;om=%.17g;w=%d,%.17g,%.17g,%.17g,%d,%.17g;",
        det_name(d.id), d.position.x(), d.position.y(), d.position.z(),
        d.omega, static_cast<int>(d.window.family), d.window.eps0,
        d.window.duration, d.window.sigma, d.window.band_index,
        d.window.boost);
    s += buf;
  }
  return s;
}

inline void validate_detectors(const std::array<DetectorSpec, 3>& dets,
                               bool enforce_causality = true) {
  bool seen[3] = {false, false, false};
  for (const auto& d : dets) {
    validate_window(d.window);
    seen[static_cast<int>(d.id)] = true;
  }
  if (!(seen[0] && seen[1] && seen[2]))
    throw ConfigError("detectors: need exactly one each of A, B, C");
  if (!enforce_causality) return;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double l = (dets[a].position - dets[b].position).norm();
      const double reach =
          0.5 * (dets[a].window.duration + dets[b].window.duration);
      if (!(l > reach))
        throw ConfigError(
            std::string("detectors: pair ") + det_name(dets[a].id) +
            det_name(dets[b].id) +
            " is not causally disconnected (separation " + std::to_string(l) +
            " <= light reach " + std::to_string(reach) + ")");
    }
}

/// Evaluate the full amplitude set with a caller-supplied kernel family per
/// detector pair. Shared by the continuum field and the lattice oracle
/// injection. `re_only_theta` selects the split extrapolation for the theta
/// terms (required for the singular continuum self-kernel).
inline AmplitudeSet amplitude_set_general(
    const std::function<KernelFactory(const DetectorSpec&,
                                      const DetectorSpec&)>& kernel_for_pair,
    const std::vector<double>& ladder, const std::array<DetectorSpec, 3>& dets,
    const PairQuad& q, bool enforce_causality, bool re_only_theta,
    const std::string& digest) {
  validate_detectors(dets, enforce_causality);
  std::array<const DetectorSpec*, 3> by_id{};
  for (const auto& d : dets) by_id[static_cast<int>(d.id)] = &d;

  AmplitudeSet out;
  out.digest = digest;
  auto track = [&out](const LadderValue& lv) {
    out.quad_resid_max = std::max(out.quad_resid_max, lv.quad_resid);
    out.extrap_resid_max = std::max(out.extrap_resid_max, lv.extrap_resid);
    return lv.value;
  };

  for (int i = 0; i < 3; ++i) {
    const DetectorSpec& d = *by_id[i];
    out.emission[i] = track(detail::ladder_eval(
        kernel_for_pair(d, d), ladder, d.window, d.omega, -1, d.window,
        d.omega, +1, /*time_ordered=*/false, q, /*re_only=*/false));
  }
  const std::array<std::pair<Det, Det>, 3> pairs{
      std::pair{Det::A, Det::B}, {Det::B, Det::C}, {Det::C, Det::A}};
  for (int s = 0; s < 3; ++s) {
    const DetectorSpec& di = *by_id[static_cast<int>(pairs[s].first)];
    const DetectorSpec& dj = *by_id[static_cast<int>(pairs[s].second)];
    auto kf = kernel_for_pair(di, dj);
    out.exchange_pp[s] = track(
        detail::ladder_eval(kf, ladder, di.window, di.omega, +1, dj.window,
                            dj.omega, +1, false, q, false));
    out.exchange_mm[s] = track(
        detail::ladder_eval(kf, ladder, di.window, di.omega, -1, dj.window,
                            dj.omega, -1, false, q, false));
    out.overlap_mp[s] = track(
        detail::ladder_eval(kf, ladder, di.window, di.omega, -1, dj.window,
                            dj.omega, +1, false, q, false));
  }
  double c = 0.0;
  for (int i = 0; i < 3; ++i) {
    const DetectorSpec& d = *by_id[i];
    auto lv = detail::ladder_eval(kernel_for_pair(d, d), ladder, d.window,
                                  d.omega, -1, d.window, d.omega, +1,
                                  /*time_ordered=*/true, q, re_only_theta);
    out.theta[i] = lv.value;
    out.quad_resid_max = std::max(out.quad_resid_max, lv.quad_resid);
    if (!re_only_theta)
      out.extrap_resid_max = std::max(out.extrap_resid_max, lv.extrap_resid);
    c += 2.0 * lv.value.real();
  }
  out.norm_term = c;
  return out;
}

/// Contraction table backed by an amplitude set, for feeding the Wick
/// expansion of the higher-point moments.
inline PairFunction make_pair_function(const AmplitudeSet& amp) {
  return PairFunction{[amp](const OperatorLabel& l, const OperatorLabel& r) {
    return amp.pair_value(l.id, l.sign, r.id, r.sign);
  }};
}

/// Continuum amplitude set of the free field: every pair amplitude needed by
/// the second-order density matrix, plus C. Requires causally disconnected
/// detectors.
inline AmplitudeSet amplitude_set(const FieldSpec& field,
                                  const std::array<DetectorSpec, 3>& dets,
                                  const PairQuad& q = {}) {
  validate_field(field);
  std::vector<double> ladder = field.ladder;
  if (ladder.empty()) ladder = {field.eps_reg};
  return amplitude_set_general(
      [&field](const DetectorSpec& a, const DetectorSpec& b) {
        return continuum_kernel(field, (a.position - b.position).norm());
      },
      ladder, dets, q, /*enforce_causality=*/true, /*re_only_theta=*/true,
      detector_digest(field, dets));
}

}  // namespace trivac
