#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "trivac/amplitudes.hpp"
#include "trivac/common.hpp"
#include "trivac/quadrature.hpp"
#include "trivac/rho.hpp"
#include "trivac/wick.hpp"
#include "trivac/windows.hpp"

namespace trivac {

/// Exact brute-force reference: a handful of field modes on a 1+1d ring in a
/// truncated Fock space. Detectors couple through their x coordinate as the
/// ring position. The ring has no strict light cone at finite mode count, so
/// this backend validates operator algebra and perturbative order, never the
/// causal-disconnection narrative of the continuum field.
struct LatticeMode {
  double k = 1.0;      ///< ring wavenumber (may be negative)
  double omega = 1.0;  ///< mode frequency, > 0
};

struct LatticeFieldSpec {
  double ring_length = 2.0 * pi;
  std::vector<LatticeMode> modes{{1.0, 1.0}, {-2.0, 2.0}, {3.0, 3.0}};
  int n_max = 4;  ///< per-mode occupation cutoff
};

inline void validate_lattice(const LatticeFieldSpec& lat) {
  if (lat.modes.empty() || lat.modes.size() > 4)
    throw ConfigError("lattice: need 1..4 modes");
  if (lat.n_max < 1 || lat.n_max > 4)
    throw ConfigError("lattice: n_max must be 1..4");
  if (!(lat.ring_length > 0.0))
    throw ConfigError("lattice: ring length must be > 0");
  for (const auto& m : lat.modes)
    if (!(m.omega > 0.0))
      throw ConfigError("lattice: mode frequencies must be > 0");
  int dim = 8;
  for (std::size_t i = 0; i < lat.modes.size(); ++i) dim *= lat.n_max + 1;
  if (dim > (1 << 13))
    throw ConfigError("lattice: Hilbert dimension exceeds the desk-scale cap");
}

inline int lattice_field_dim(const LatticeFieldSpec& lat) {
  int d = 1;
  for (std::size_t i = 0; i < lat.modes.size(); ++i) d *= lat.n_max + 1;
  return d;
}

/// Mode-sum two-point function of the ring field,
///   W(dx, tau) = sum_k exp(i k dx) exp(-i w_k tau) / (2 w_k L).
inline cplx lattice_wightman(const LatticeFieldSpec& lat, double dx,
                             double tau) {
  cplx acc(0.0, 0.0);
  for (const auto& m : lat.modes)
    acc += std::exp(cplx(0.0, m.k * dx - m.omega * tau)) /
           (2.0 * m.omega * lat.ring_length);
  return acc;
}

/// Kernel family for injecting the ring field into the smeared-moment
/// quadrature. Regular at coincidence; the regulator argument is ignored, so
/// pass an empty ladder.
inline KernelFactory lattice_kernel(const LatticeFieldSpec& lat, double xi,
                                    double xj) {
  double wmax = 0.0;
  for (const auto& m : lat.modes) wmax = std::max(wmax, m.omega);
  return [lat, xi, xj, wmax](double) {
    return PairKernel{
        [lat, dx = xi - xj](double u) { return lattice_wightman(lat, dx, u); },
        wmax};
  };
}

namespace detail {

/// Ladder coefficients of the smeared operators: on the ring,
///   Phi_i^{s} = sum_k [ e^{i k x_i} g_i(s Om_i - w_k) a_k
///                     + e^{-i k x_i} g_i(s Om_i + w_k) a_k^dag ]
///                / sqrt(2 w_k L),
/// with g_i the window transform.
struct SmearedOpCoefs {
  std::vector<cplx> a;       // coefficient of a_k
  std::vector<cplx> a_dag;   // coefficient of a_k^dag
};

inline SmearedOpCoefs smeared_coefs(const LatticeFieldSpec& lat,
                                    const DetectorSpec& det, int sign) {
  SmearedOpCoefs co;
  const double x = det.position.x();
  for (const auto& m : lat.modes) {
    const double norm = std::sqrt(2.0 * m.omega * lat.ring_length);
    const double gm = window_transform(det.window, sign * det.omega - m.omega);
    const double gp = window_transform(det.window, sign * det.omega + m.omega);
    co.a.push_back(std::exp(cplx(0.0, m.k * x)) * gm / norm);
    co.a_dag.push_back(std::exp(cplx(0.0, -m.k * x)) * gp / norm);
  }
  return co;
}

}  // namespace detail

/// Exact ordered pair amplitudes d_{ij}^{ab} on the ring, by ladder algebra:
/// <0| Phi_i^a Phi_j^b |0> = sum_k (a-coef of i) (a^dag-coef of j).
inline PairFunction oracle_pair_function(
    const LatticeFieldSpec& lat, const std::array<DetectorSpec, 3>& dets) {
  validate_lattice(lat);
  validate_detectors(dets, /*enforce_causality=*/false);
  std::array<const DetectorSpec*, 3> by_id{};
  for (const auto& d : dets) by_id[static_cast<int>(d.id)] = &d;

  // coefs[det][0] for sign -, [1] for sign +.
  auto coefs = std::make_shared<
      std::array<std::array<detail::SmearedOpCoefs, 2>, 3>>();
  for (int i = 0; i < 3; ++i) {
    (*coefs)[i][0] = detail::smeared_coefs(lat, *by_id[i], -1);
    (*coefs)[i][1] = detail::smeared_coefs(lat, *by_id[i], +1);
  }
  const std::size_t n_modes = lat.modes.size();
  return PairFunction{
      [coefs, n_modes](const OperatorLabel& l, const OperatorLabel& r) {
        const auto& cl = (*coefs)[static_cast<int>(l.id)][l.sign > 0 ? 1 : 0];
        const auto& cr = (*coefs)[static_cast<int>(r.id)][r.sign > 0 ? 1 : 0];
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k < n_modes; ++k)
          acc += cl.a[k] * cr.a_dag[k];
        return acc;
      }};
}

/// Exact time-ordered self term on the ring: mode sum of 1d window
/// autocorrelation integrals over the ordered half u = t - t' > 0.
inline cplx oracle_theta(const LatticeFieldSpec& lat,
                         const DetectorSpec& det) {
  validate_lattice(lat);
  const WindowSpec& w = det.window;
  const double tdur = w.duration;
  auto autocorr = [&](double u) {
    const double lo = -0.5 * (tdur - u);
    const double hi = 0.5 * (tdur - u);
    if (!(hi > lo)) return 0.0;
    const int init = panels_for_oscillation(lo, hi, 2.0 * window_freq_hint(w));
    return integrate_adaptive<double>(
               [&](double v) {
                 return eval_window(w, v + 0.5 * u) *
                        eval_window(w, v - 0.5 * u);
               },
               lo, hi, 1e-12, init, 2048)
        .value;
  };
  cplx acc(0.0, 0.0);
  for (const auto& m : lat.modes) {
    const double nu = det.omega + m.omega;
    const int init = panels_for_oscillation(0.0, tdur,
                                            nu + window_freq_hint(w));
    auto res = integrate_adaptive<cplx>(
        [&](double u) {
          return std::exp(cplx(0.0, -nu * u)) * autocorr(u);
        },
        0.0, tdur, 1e-12, init, 2048);
    acc += res.value / (2.0 * m.omega * lat.ring_length);
  }
  return acc;
}

/// Time-ordered double-raising cross moment on the ring,
///   <0| T[ int H_i int H_j ] |0> restricted to the ++ pattern:
/// the second-order coefficient that actually multiplies the doubly excited
/// sector when the two detectors are not causally disconnected. For a
/// spacelike-separated continuum pair the field factors commute and this
/// collapses to the plain exchange amplitude d_{ij}^{++}.
inline cplx oracle_time_ordered_exchange(const LatticeFieldSpec& lat,
                                         const DetectorSpec& det_i,
                                         const DetectorSpec& det_j,
                                         const PairQuad& q = {}) {
  auto half = [&](const DetectorSpec& a, const DetectorSpec& b) {
    return smeared_moment(lattice_kernel(lat, a.position.x(),
                                         b.position.x()),
                          {}, a.window, a.omega, +1, b.window, b.omega, +1,
                          /*time_ordered=*/true, q)
        .value;
  };
  return half(det_i, det_j) + half(det_j, det_i);
}

/// Canonical amplitude set assembled from the exact ring pair amplitudes.
///
/// The stored exchange_pp slots hold the time-ordered cross moments (the
/// ring has no light cone, so ordering matters at leading order there);
/// Wick expansions of plain ordered strings should use
/// oracle_pair_function instead of make_pair_function on this set.
inline AmplitudeSet oracle_amplitude_set(
    const LatticeFieldSpec& lat, const std::array<DetectorSpec, 3>& dets) {
  PairFunction pf = oracle_pair_function(lat, dets);
  std::array<const DetectorSpec*, 3> by_id{};
  for (const auto& d : dets) by_id[static_cast<int>(d.id)] = &d;

  AmplitudeSet amp;
  char buf[64];
  std::snprintf(buf, sizeof buf, "lattice:M=%zu,nmax=%d;", lat.modes.size(),
                lat.n_max);
  amp.digest = buf + detector_digest(FieldSpec{}, dets);
  auto val = [&pf](Det i, int si, Det j, int sj) {
    return pf.value(OperatorLabel{i, si}, OperatorLabel{j, sj});
  };
  for (int i = 0; i < 3; ++i) {
    const Det d = static_cast<Det>(i);
    amp.emission[i] = val(d, -1, d, +1);
  }
  const std::array<std::pair<Det, Det>, 3> pairs{
      std::pair{Det::A, Det::B}, {Det::B, Det::C}, {Det::C, Det::A}};
  for (int s = 0; s < 3; ++s) {
    const auto [i, j] = pairs[s];
    amp.exchange_pp[s] =
        oracle_time_ordered_exchange(lat, *by_id[static_cast<int>(i)],
                                     *by_id[static_cast<int>(j)]);
    amp.exchange_mm[s] = val(i, -1, j, -1);
    amp.overlap_mp[s] = val(i, -1, j, +1);
  }
  double c = 0.0;
  for (int i = 0; i < 3; ++i) {
    amp.theta[i] = oracle_theta(lat, *by_id[i]);
    c += 2.0 * amp.theta[i].real();
  }
  amp.norm_term = c;
  return amp;
}

namespace detail {

struct FockOps {
  int field_dim = 0;
  std::vector<int> strides;                 // per-mode index stride
  std::vector<std::vector<double>> lower;   // sqrt(n) amplitudes by index
};

inline FockOps build_fock_ops(const LatticeFieldSpec& lat) {
  FockOps ops;
  const int nm = static_cast<int>(lat.modes.size());
  ops.strides.resize(nm);
  int dim = 1;
  for (int m = 0; m < nm; ++m) {
    ops.strides[m] = dim;
    dim *= lat.n_max + 1;
  }
  ops.field_dim = dim;
  ops.lower.assign(nm, std::vector<double>(dim, 0.0));
  for (int m = 0; m < nm; ++m)
    for (int idx = 0; idx < dim; ++idx) {
      const int occ = (idx / ops.strides[m]) % (lat.n_max + 1);
      ops.lower[m][idx] = occ > 0 ? std::sqrt(static_cast<double>(occ)) : 0.0;
    }
  return ops;
}

/// Dense matrix of a smeared operator Phi_i^s on the truncated field space.
inline Eigen::MatrixXcd smeared_matrix(const LatticeFieldSpec& lat,
                                       const FockOps& ops,
                                       const SmearedOpCoefs& co) {
  const int dim = ops.field_dim;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 0; k < lat.modes.size(); ++k) {
    const int st = ops.strides[k];
    for (int idx = 0; idx < dim; ++idx) {
      const double amp = ops.lower[k][idx];
      if (amp == 0.0) continue;
      m(idx - st, idx) += co.a[k] * amp;      // a_k
      m(idx, idx - st) += co.a_dag[k] * amp;  // a_k^dag
    }
  }
  return m;
}

}  // namespace detail

/// Vacuum moment of an ordered string of smeared operators, by explicit
/// matrix products on the truncated Fock space. Exact as long as the string
/// cannot climb past the occupation cutoff.
inline cplx oracle_npoint(const LatticeFieldSpec& lat,
                          const std::array<DetectorSpec, 3>& dets,
                          std::span<const OperatorLabel> ops_list) {
  validate_lattice(lat);
  validate_detectors(dets, /*enforce_causality=*/false);
  if (static_cast<int>(ops_list.size()) > 2 * lat.n_max)
    throw TruncationError(
        "oracle_npoint: operator string can climb past the occupation "
        "cutoff");
  std::array<const DetectorSpec*, 3> by_id{};
  for (const auto& d : dets) by_id[static_cast<int>(d.id)] = &d;

  const detail::FockOps ops = detail::build_fock_ops(lat);
  // Cache the six possible smeared matrices on demand.
  std::array<std::array<Eigen::MatrixXcd, 2>, 3> mats;
  std::array<std::array<bool, 2>, 3> have{};
  auto matrix_for = [&](const OperatorLabel& l) -> const Eigen::MatrixXcd& {
    const int i = static_cast<int>(l.id);
    const int s = l.sign > 0 ? 1 : 0;
    if (!have[i][s]) {
      mats[i][s] = detail::smeared_matrix(
          lat, ops, detail::smeared_coefs(lat, *by_id[i], l.sign));
      have[i][s] = true;
    }
    return mats[i][s];
  };

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(ops.field_dim);
  v(0) = 1.0;
  for (auto it = ops_list.rbegin(); it != ops_list.rend(); ++it)
    v = matrix_for(*it) * v;
  return v(0);
}

inline cplx oracle_npoint(const LatticeFieldSpec& lat,
                          const std::array<DetectorSpec, 3>& dets,
                          std::initializer_list<OperatorLabel> ops_list) {
  return oracle_npoint(
      lat, dets, std::span<const OperatorLabel>(ops_list.begin(),
                                                ops_list.size()));
}

struct EvolveOpts {
  int steps = 2048;
  bool halving_check = true;  ///< refine until halving dt moves rho < 1e-8
  int max_refine = 4;
  double halving_tol = 1e-8;
};

struct EvolveDiag {
  double unitarity_drift = 0.0;  ///< max deviation of ||psi||^2 from 1
  double halving_diff = 0.0;     ///< rho change under the last dt halving
  double top_level_pop = 0.0;    ///< population at the occupation cutoff
  int steps_used = 0;
};

namespace detail {

/// One full evolution at fixed step count with the fourth-order
/// commutator-free Magnus stepper (two exponentials per step, Gauss-2
/// nodes), applied through structured matrix-free products. Interaction
/// picture: the free field evolution lives in the mode phases.
inline Eigen::MatrixXcd evolve_fixed(const LatticeFieldSpec& lat,
                                     const std::array<DetectorSpec, 3>& dets,
                                     double eps_scale, int steps,
                                     double* unitarity_drift) {
  std::array<const DetectorSpec*, 3> by_id{};
  for (const auto& d : dets) by_id[static_cast<int>(d.id)] = &d;
  double tmax = 0.0;
  for (const auto& d : dets) tmax = std::max(tmax, d.window.duration);

  const FockOps ops = build_fock_ops(lat);
  const int fd = ops.field_dim;
  const int nm = static_cast<int>(lat.modes.size());

  Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(fd, 8);
  psi(0, 0) = 1.0;

  Eigen::MatrixXcd pk(fd, 8), qk(fd, 8), phi_acc(fd, 8);

  // H(t) psi, with H(t) = sum_i eps_i(t)(e^{i Om t} raise_i + h.c.) phi_i(t).
  auto apply_h = [&](double t, const Eigen::MatrixXcd& in,
                     Eigen::MatrixXcd& out) {
    out.setZero();
    for (int i = 0; i < 3; ++i) {
      const DetectorSpec& det = *by_id[i];
      const double eps = eps_scale * eval_window(det.window, t);
      if (eps == 0.0) continue;
      phi_acc.setZero();
      for (int k = 0; k < nm; ++k) {
        const auto& low = ops.lower[k];
        const int st = ops.strides[k];
        pk.setZero();
        qk.setZero();
        for (int idx = 0; idx < fd; ++idx) {
          const double amp = low[idx];
          if (amp == 0.0) continue;
          pk.row(idx - st) += amp * in.row(idx);  // a_k
          qk.row(idx) += amp * in.row(idx - st);  // a_k^dag
        }
        const LatticeMode& md = lat.modes[k];
        const double norm = std::sqrt(2.0 * md.omega * lat.ring_length);
        const cplx ph = std::exp(cplx(0.0, md.k * det.position.x() -
                                               md.omega * t)) /
                        norm;
        phi_acc += ph * pk + std::conj(ph) * qk;
      }
      const int bit = 4 >> i;  // A:4, B:2, C:1
      const cplx up = eps * std::exp(cplx(0.0, det.omega * t));
      const cplx dn = eps * std::exp(cplx(0.0, -det.omega * t));
      for (int d = 0; d < 8; ++d) {
        if (d & bit)
          out.col(d) += up * phi_acc.col(d & ~bit);  // raise detector i
        else
          out.col(d) += dn * phi_acc.col(d | bit);   // lower detector i
      }
    }
  };

  const double h = tmax / steps;
  const double f1 = 0.25 - std::sqrt(3.0) / 6.0;
  const double f2 = 0.25 + std::sqrt(3.0) / 6.0;
  const double g1 = 0.5 - std::sqrt(3.0) / 6.0;  // Gauss-2 nodes
  const double g2 = 0.5 + std::sqrt(3.0) / 6.0;

  Eigen::MatrixXcd term(fd, 8), h1(fd, 8), h2(fd, 8);
  auto apply_exp = [&](double t1, double t2, double w1, double w2) {
    // psi <- exp(-i h (w1 H(t1) + w2 H(t2))) psi by Taylor series; the
    // operator norm per step is tiny so this converges in a few terms.
    term = psi;
    for (int k = 1; k <= 30; ++k) {
      apply_h(t1, term, h1);
      apply_h(t2, term, h2);
      term = (cplx(0.0, -h) / static_cast<double>(k)) * (w1 * h1 + w2 * h2);
      psi += term;
      if (term.norm() < 1e-17 * psi.norm()) break;
    }
  };

  double drift = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double t0 = -0.5 * tmax + s * h;
    const double t1 = t0 + g1 * h;
    const double t2 = t0 + g2 * h;
    apply_exp(t1, t2, f2, f1);  // right factor: earlier node dominates
    apply_exp(t1, t2, f1, f2);
    drift = std::max(drift, std::abs(psi.squaredNorm() - 1.0));
  }
  if (unitarity_drift) *unitarity_drift = drift;
  return psi;
}

inline Rho8 partial_trace_field(const Eigen::MatrixXcd& psi) {
  Rho8 rho;
  Eigen::Matrix<cplx, 8, 8> m = (psi.adjoint() * psi).conjugate();
  rho.m = m;
  rho.normalized = true;
  return rho;
}

}  // namespace detail

/// Exact joint evolution of field plus three detectors from |0>|ddd> under
/// the interaction Hamiltonian, then partial trace over the field. The
/// coupling scale multiplies every window amplitude. Step count doubles
/// until a dt-halving moves the result by less than the tolerance.
inline Rho8 exact_evolution(const LatticeFieldSpec& lat,
                            const std::array<DetectorSpec, 3>& dets,
                            double eps_scale, const EvolveOpts& opts = {},
                            EvolveDiag* diag = nullptr) {
  validate_lattice(lat);
  validate_detectors(dets, /*enforce_causality=*/false);

  EvolveDiag d;
  int steps = opts.steps;
  Eigen::MatrixXcd psi =
      detail::evolve_fixed(lat, dets, eps_scale, steps, &d.unitarity_drift);
  Rho8 rho = detail::partial_trace_field(psi);

  if (opts.halving_check) {
    bool ok = false;
    for (int r = 0; r < opts.max_refine; ++r) {
      const int fine_steps = steps * 2;
      double drift2 = 0.0;
      Eigen::MatrixXcd psi2 =
          detail::evolve_fixed(lat, dets, eps_scale, fine_steps, &drift2);
      Rho8 rho2 = detail::partial_trace_field(psi2);
      d.halving_diff = (rho2.m - rho.m).cwiseAbs().maxCoeff();
      psi = std::move(psi2);
      rho = rho2;
      steps = fine_steps;
      d.unitarity_drift = std::max(d.unitarity_drift, drift2);
      if (d.halving_diff <= opts.halving_tol) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw NumericalError(
          "exact_evolution: stepper did not converge under dt halving (last "
          "change " +
          std::to_string(d.halving_diff) + ")");
  }
  d.steps_used = steps;

  // Population stranded at the occupation cutoff would mean the truncated
  // space is too small for this coupling.
  const detail::FockOps ops = detail::build_fock_ops(lat);
  double top = 0.0;
  for (int idx = 0; idx < ops.field_dim; ++idx) {
    bool at_top = false;
    for (std::size_t m = 0; m < lat.modes.size(); ++m)
      if ((idx / ops.strides[m]) % (lat.n_max + 1) == lat.n_max)
        at_top = true;
    if (at_top) top += psi.row(idx).squaredNorm();
  }
  d.top_level_pop = top;
  if (diag) *diag = d;
  if (top > 1e-10) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "exact_evolution: top-level population %.3e exceeds the "
                  "truncation budget",
                  top);
    throw TruncationError(msg);
  }
  return rho;
}

}  // namespace trivac
