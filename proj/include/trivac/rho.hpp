#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <vector>

#include "trivac/amplitudes.hpp"
#include "trivac/common.hpp"
#include "trivac/wick.hpp"

namespace trivac {

using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using Vec8 = Eigen::Matrix<cplx, 8, 1>;

/// Three-qubit density matrix over the computational basis
/// {ddd, ddu, dud, duu, udd, udu, uud, uuu} with qubit order (A, B, C),
/// d = 0 (ground), u = 1 (excited); basis index = 4A + 2B + C.
struct Rho8 {
  Mat8 m = Mat8::Zero();
  bool normalized = false;
};

/// Filter strength: the ground component of each detector is attenuated by
/// eta in (0, 1].
struct FilterParam {
  double eta = 1.0;
};

inline int n_down(int basis) {
  return 3 - ((basis & 1) + ((basis >> 1) & 1) + ((basis >> 2) & 1));
}

inline Rho8 rho_from_state(const Vec8& psi) {
  Rho8 rho;
  rho.m = psi * psi.adjoint();
  rho.normalized = std::abs(psi.squaredNorm() - 1.0) < 1e-12;
  return rho;
}

/// (|udd> + |dud> + |ddu>)/sqrt(3)
inline Vec8 w_state_vec() {
  Vec8 v = Vec8::Zero();
  v(4) = v(2) = v(1) = 1.0 / std::sqrt(3.0);
  return v;
}

/// (|ddd> + |uuu>)/sqrt(2)
inline Vec8 ghz_state_vec() {
  Vec8 v = Vec8::Zero();
  v(0) = v(7) = 1.0 / std::sqrt(2.0);
  return v;
}

/// (|ddd> - |duu> - |udu>)/sqrt(3): the pure state the filtered exchange-
/// dominated configuration collapses to.
inline Vec8 dominance_state_vec() {
  Vec8 v = Vec8::Zero();
  const double r = 1.0 / std::sqrt(3.0);
  v(0) = r;
  v(3) = -r;
  v(5) = -r;
  return v;
}

/// Assemble the unnormalized second-order reduced density matrix of the
/// three detectors from the pair amplitudes and the Wick-derived
/// higher-point moments, every entry at its lowest nonvanishing order.
///
/// Both triangles are filled with the same amplitude values (they are real
/// up to quadrature noise), then the matrix is symmetrized; the residual
/// reported through `herm_resid` is the pre-symmetrization asymmetry, which
/// is bounded by the imaginary parts the quadrature leaves behind.
inline Rho8 assemble(const AmplitudeSet& base, const DerivedAmplitudes& drv,
                     double* herm_resid = nullptr) {
  if (!base.digest.empty() && !drv.digest.empty() &&
      base.digest != drv.digest)
    throw ConfigError(
        "assemble: amplitude set and derived moments come from different "
        "detector configurations");

  const cplx dAA = base.emission[0], dBB = base.emission[1],
             dCC = base.emission[2];
  const cplx xAB = base.exchange_pp[0], xBC = base.exchange_pp[1],
             xCA = base.exchange_pp[2];
  const cplx oAB = base.overlap_mp[0], oBC = base.overlap_mp[1],
             oCA = base.overlap_mp[2];

  Rho8 rho;
  Mat8& m = rho.m;
  m.setZero();

  m(0, 0) = 1.0 - base.norm_term;

  // Single-excitation block: diagonal emissions, off-diagonal overlaps.
  // Orientation: entry (r, c) is the inner product of the field companion
  // of column c against that of row r, so the stored ordered amplitudes sit
  // in one triangle and their conjugates in the other. For real amplitudes
  // (even windows, spacelike pairs) the two coincide.
  m(1, 1) = dCC;
  m(2, 2) = dBB;
  m(4, 4) = dAA;
  m(1, 2) = oBC;
  m(2, 1) = std::conj(oBC);
  m(4, 1) = oCA;
  m(1, 4) = std::conj(oCA);
  m(2, 4) = oAB;
  m(4, 2) = std::conj(oAB);

  // Ground <-> double-excitation row/column: exchange amplitudes.
  m(3, 0) = -xBC;
  m(0, 3) = -std::conj(xBC);
  m(5, 0) = -xCA;
  m(0, 5) = -std::conj(xCA);
  m(6, 0) = -xAB;
  m(0, 6) = -std::conj(xAB);

  // Double-excitation block from the four-point moments.
  m(3, 3) = drv.bcbc_mmpp;
  m(5, 5) = drv.caca_mmpp;
  m(6, 6) = drv.abab_mmpp;
  m(3, 5) = drv.cabc_mmpp;
  m(5, 3) = std::conj(drv.cabc_mmpp);
  m(3, 6) = drv.abbc_mmpp;
  m(6, 3) = std::conj(drv.abbc_mmpp);
  m(5, 6) = drv.abca_mmpp;
  m(6, 5) = std::conj(drv.abca_mmpp);

  // Single <-> triple excitation: the cubic amplitude interferes with the
  // linear one. The overall minus follows from the (-i)(-i) phases of the
  // first- and third-order terms of the evolution; the lattice oracle's
  // exact evolution pins this orientation.
  m(1, 7) = -drv.abcc_mmmp;
  m(7, 1) = -std::conj(drv.abcc_mmmp);
  m(2, 7) = -drv.abcb_mmmp;
  m(7, 2) = -std::conj(drv.abcb_mmmp);
  m(4, 7) = -drv.abca_mmmp;
  m(7, 4) = -std::conj(drv.abca_mmmp);

  m(7, 7) = drv.abcabc_mmmppp;

  const double resid = (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
  if (herm_resid) *herm_resid = resid;
  m = 0.5 * (m + m.adjoint().eval());
  rho.normalized = false;
  return rho;
}

/// Local filtering: conjugation by diag(eta^{n_down}); attenuates ground
/// components, entry (r, c) picks up eta^{n_down(r) + n_down(c)}.
inline Rho8 filter(const Rho8& rho, const FilterParam& f) {
  if (!(f.eta > 0.0) || f.eta > 1.0)
    throw ConfigError("filter: eta must lie in (0, 1]");
  Rho8 out;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      out.m(r, c) = rho.m(r, c) * std::pow(f.eta, n_down(r) + n_down(c));
  out.normalized = false;
  return out;
}

inline Rho8 normalize(const Rho8& rho) {
  const double tr = rho.m.trace().real();
  if (!(tr > 1e-300))
    throw DegenerateStateError(
        "normalize: trace " + std::to_string(tr) + " is at or below the floor");
  Rho8 out;
  out.m = rho.m / tr;
  out.normalized = true;
  return out;
}

/// Synthetic amplitude set of the exchange-dominance regime: the two
/// exchange pairs involving detector C carry weight s, everything else is
/// zero.
inline AmplitudeSet synthetic_dominance_amplitudes(double s) {
  AmplitudeSet amp;
  const int bc = AmplitudeSet::cross_slot(Det::B, Det::C);
  const int ca = AmplitudeSet::cross_slot(Det::C, Det::A);
  amp.exchange_pp[bc] = amp.exchange_mm[bc] = s;
  amp.exchange_pp[ca] = amp.exchange_mm[ca] = s;
  amp.norm_term = 0.0;
  amp.digest = "synthetic-dominance";
  return amp;
}

/// Exchange-dominance limit: assemble the synthetic amplitude set, filter
/// with eta = sqrt(s), normalize. The result is the same pure state for
/// every s in (0, 1].
inline std::pair<Rho8, FilterParam> dominance_limit(double s) {
  if (!(s > 0.0) || s > 1.0)
    throw ConfigError("dominance_limit: s must lie in (0, 1]");
  AmplitudeSet amp = synthetic_dominance_amplitudes(s);
  DerivedAmplitudes drv =
      derived_amplitudes(make_pair_function(amp), amp.digest);
  Rho8 rho = assemble(amp, drv);
  FilterParam f{std::sqrt(s)};
  return {normalize(filter(rho, f)), f};
}

/// Fixed local unitary taking the dominance-limit state to the W state:
/// bit-flip on C, phase -1 on the excited level of A and of B. Returns the
/// transformed state and its overlap with the W state.
inline std::pair<Rho8, double> to_w_state(const Rho8& rho) {
  Mat8 u = Mat8::Zero();
  for (int b = 0; b < 8; ++b) {
    const double phase =
        ((b & 4) ? -1.0 : 1.0) * ((b & 2) ? -1.0 : 1.0);
    u(b ^ 1, b) = phase;  // X on C after the A/B phases
  }
  Rho8 out;
  out.m = u * rho.m * u.adjoint();
  out.normalized = rho.normalized;
  const Vec8 w = w_state_vec();
  const double fid = (w.adjoint() * out.m * w)(0, 0).real();
  return {out, fid};
}

inline double fidelity(const Rho8& rho, const Vec8& target) {
  const double norm = target.squaredNorm();
  if (std::abs(norm - 1.0) > 1e-10)
    throw ConfigError("fidelity: target state is not normalized");
  return (target.adjoint() * rho.m * target)(0, 0).real();
}

struct RhoReport {
  double herm_resid = 0.0;
  cplx trace{};
  std::vector<double> eigenvalues;  ///< ascending, of the hermitized matrix
  double min_eig = 0.0;
  double purity = 0.0;
};

/// Report-only physicality check; never throws on unphysical input.
inline RhoReport validate(const Rho8& rho) {
  RhoReport rep;
  rep.herm_resid = (rho.m - rho.m.adjoint().eval()).cwiseAbs().maxCoeff();
  rep.trace = rho.m.trace();
  Mat8 h = 0.5 * (rho.m + rho.m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Mat8> es(h);
  rep.eigenvalues.assign(es.eigenvalues().data(),
                         es.eigenvalues().data() + 8);
  rep.min_eig = rep.eigenvalues.front();
  rep.purity = (rho.m * rho.m).trace().real();
  return rep;
}

/// Clip negative eigenvalues (second-order truncation artifacts) and
/// renormalize. Opt-in; the raw perturbative matrix stays inspectable.
inline Rho8 psd_project(const Rho8& rho) {
  Mat8 h = 0.5 * (rho.m + rho.m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Mat8> es(h);
  Eigen::Matrix<double, 8, 1> ev = es.eigenvalues().cwiseMax(0.0);
  Rho8 out;
  out.m = es.eigenvectors() * ev.cast<cplx>().asDiagonal() *
          es.eigenvectors().adjoint();
  return normalize(out);
}

}  // namespace trivac
