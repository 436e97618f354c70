#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "trivac/common.hpp"
#include "trivac/rho.hpp"
#include "trivac/simplex.hpp"

namespace trivac {

using Mat2 = Eigen::Matrix<cplx, 2, 2>;

/// Pauli matrices in the computational ordering (ground first), so the
/// ground state is the -1 eigenstate of the z observable.
inline Mat2 pauli(int i) {
  Mat2 m;
  switch (i) {
    case 0: m << 0, 1, 1, 0; break;                          // x
    case 1: m << 0, cplx(0, 1), cplx(0, -1), 0; break;       // y
    default: m << -1, 0, 0, 1; break;                        // z
  }
  return m;
}

inline Mat2 bloch_op(const Eigen::Vector3d& n) {
  return n.x() * pauli(0) + n.y() * pauli(1) + n.z() * pauli(2);
}

/// Two dichotomic spin observables per party, as Bloch directions.
struct MeasurementSettings {
  std::array<Eigen::Vector3d, 2> a{Eigen::Vector3d::UnitZ(),
                                   Eigen::Vector3d::UnitX()};
  std::array<Eigen::Vector3d, 2> b{Eigen::Vector3d::UnitZ(),
                                   Eigen::Vector3d::UnitX()};
  std::array<Eigen::Vector3d, 2> c{Eigen::Vector3d::UnitZ(),
                                   Eigen::Vector3d::UnitX()};
};

inline void validate_settings(const MeasurementSettings& s) {
  for (const auto* arr : {&s.a, &s.b, &s.c})
    for (const auto& v : *arr)
      if (std::abs(v.norm() - 1.0) > 1e-12)
        throw ConfigError("settings: Bloch directions must be unit vectors");
}

/// Sign of the term (x, y, z) in the Svetlichny combination:
/// (-1)^{xy + yz + zx}.
inline double svetlichny_sign(int x, int y, int z) {
  return ((x * y + y * z + z * x) % 2 == 0) ? 1.0 : -1.0;
}

/// Full correlation tensor T_ijk = tr(rho s_i x s_j x s_k).
inline std::array<std::array<std::array<double, 3>, 3>, 3> correlation_tensor(
    const Rho8& rho) {
  std::array<std::array<std::array<double, 3>, 3>, 3> t{};
  std::array<Mat2, 3> s{pauli(0), pauli(1), pauli(2)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        cplx acc(0.0, 0.0);
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c)
            acc += rho.m(r, c) * s[i](c >> 2, r >> 2) *
                   s[j]((c >> 1) & 1, (r >> 1) & 1) * s[k](c & 1, r & 1);
        t[i][j][k] = acc.real();
      }
  return t;
}

/// Tripartite measurement statistics p(a, b, c | x, y, z): 2 settings and 2
/// outcomes per party. Outcome bit 0 encodes +1, bit 1 encodes -1.
struct Behavior {
  std::array<double, 64> p{};

  static int index(int x, int y, int z, int abit, int bbit, int cbit) {
    return ((x * 2 + y) * 2 + z) * 8 + (abit * 4 + bbit * 2 + cbit);
  }
};

inline Behavior behavior_from_rho(const Rho8& rho,
                                  const MeasurementSettings& st,
                                  double psd_tol = 1e-8) {
  validate_settings(st);
  if (std::abs(rho.m.trace().real() - 1.0) > 1e-10)
    throw ConfigError("behavior_from_rho: state is not normalized");
  {
    Eigen::SelfAdjointEigenSolver<Mat8> es(
        (0.5 * (rho.m + rho.m.adjoint().eval())).eval());
    if (es.eigenvalues().minCoeff() < -psd_tol)
      throw NumericalError(
          "behavior_from_rho: state is not positive semidefinite (min "
          "eigenvalue " +
          std::to_string(es.eigenvalues().minCoeff()) +
          "); project it first");
  }

  auto projector = [](const Eigen::Vector3d& n, int outcome_bit) {
    const double sgn = outcome_bit == 0 ? 1.0 : -1.0;
    return Mat2((0.5 * (Mat2::Identity() + sgn * bloch_op(n))).eval());
  };

  Behavior beh;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int ab = 0; ab < 2; ++ab)
          for (int bb = 0; bb < 2; ++bb)
            for (int cb = 0; cb < 2; ++cb) {
              const Mat2 pa = projector(st.a[x], ab);
              const Mat2 pb = projector(st.b[y], bb);
              const Mat2 pc = projector(st.c[z], cb);
              cplx acc(0.0, 0.0);
              for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                  acc += rho.m(r, c) * pa(c >> 2, r >> 2) *
                         pb((c >> 1) & 1, (r >> 1) & 1) * pc(c & 1, r & 1);
              beh.p[Behavior::index(x, y, z, ab, bb, cb)] = acc.real();
            }
  return beh;
}

inline double correlator(const Behavior& beh, int x, int y, int z) {
  double e = 0.0;
  for (int ab = 0; ab < 2; ++ab)
    for (int bb = 0; bb < 2; ++bb)
      for (int cb = 0; cb < 2; ++cb) {
        const double prod = (ab ? -1.0 : 1.0) * (bb ? -1.0 : 1.0) *
                            (cb ? -1.0 : 1.0);
        e += prod * beh.p[Behavior::index(x, y, z, ab, bb, cb)];
      }
  return e;
}

inline double svetlichny_value(const Behavior& beh) {
  double s = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        s += svetlichny_sign(x, y, z) * correlator(beh, x, y, z);
  return s;
}

inline double svetlichny_value(const Rho8& rho,
                               const MeasurementSettings& st) {
  validate_settings(st);
  const auto t = correlation_tensor(rho);
  double s = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        double e = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
              e += st.a[x](i) * st.b[y](j) * st.c[z](k) * t[i][j][k];
        s += svetlichny_sign(x, y, z) * e;
      }
  return s;
}

struct SvetlichnyOpts {
  int starts = 64;
  std::uint64_t seed = 0;
  int max_iter = 500;
  double step_tol = 1e-10;
};

struct SvetlichnyMax {
  double s_star = 0.0;
  MeasurementSettings settings;
  std::vector<double> local_optima;  ///< converged value of every start
  bool converged = true;
};

/// Best Svetlichny value over measurement settings by seeded multi-start
/// coordinate ascent. Each party update is exact: the combination is linear
/// in that party's two Bloch vectors, so the optimum aligns them with the
/// conditional correlation vectors.
inline SvetlichnyMax maximize_svetlichny(const Rho8& rho,
                                         const SvetlichnyOpts& opts = {}) {
  const auto t = correlation_tensor(rho);
  SplitMix64 rng(opts.seed);

  auto random_unit = [&rng]() {
    const double z = 1.0 - 2.0 * rng.next_double();
    const double phi = 2.0 * pi * rng.next_double();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
  };

  auto eval = [&t](const MeasurementSettings& st) {
    double s = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z) {
          double e = 0.0;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              for (int k = 0; k < 3; ++k)
                e += st.a[x](i) * st.b[y](j) * st.c[z](k) * t[i][j][k];
          s += svetlichny_sign(x, y, z) * e;
        }
    return s;
  };

  SvetlichnyMax best;
  best.s_star = -1e300;
  for (int start = 0; start < opts.starts; ++start) {
    MeasurementSettings st;
    for (auto* arr : {&st.a, &st.b, &st.c})
      for (auto& v : *arr) v = random_unit();

    bool this_converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      double step = 0.0;
      // Party A update.
      for (int x = 0; x < 2; ++x) {
        Eigen::Vector3d m = Eigen::Vector3d::Zero();
        for (int y = 0; y < 2; ++y)
          for (int z = 0; z < 2; ++z) {
            const double sg = svetlichny_sign(x, y, z);
            for (int i = 0; i < 3; ++i) {
              double acc = 0.0;
              for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                  acc += st.b[y](j) * st.c[z](k) * t[i][j][k];
              m(i) += sg * acc;
            }
          }
        if (m.norm() > 1e-14) {
          Eigen::Vector3d nv = m.normalized();
          step = std::max(step, (nv - st.a[x]).norm());
          st.a[x] = nv;
        }
      }
      // Party B update.
      for (int y = 0; y < 2; ++y) {
        Eigen::Vector3d m = Eigen::Vector3d::Zero();
        for (int x = 0; x < 2; ++x)
          for (int z = 0; z < 2; ++z) {
            const double sg = svetlichny_sign(x, y, z);
            for (int j = 0; j < 3; ++j) {
              double acc = 0.0;
              for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k)
                  acc += st.a[x](i) * st.c[z](k) * t[i][j][k];
              m(j) += sg * acc;
            }
          }
        if (m.norm() > 1e-14) {
          Eigen::Vector3d nv = m.normalized();
          step = std::max(step, (nv - st.b[y]).norm());
          st.b[y] = nv;
        }
      }
      // Party C update.
      for (int z = 0; z < 2; ++z) {
        Eigen::Vector3d m = Eigen::Vector3d::Zero();
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) {
            const double sg = svetlichny_sign(x, y, z);
            for (int k = 0; k < 3; ++k) {
              double acc = 0.0;
              for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                  acc += st.a[x](i) * st.b[y](j) * t[i][j][k];
              m(k) += sg * acc;
            }
          }
        if (m.norm() > 1e-14) {
          Eigen::Vector3d nv = m.normalized();
          step = std::max(step, (nv - st.c[z]).norm());
          st.c[z] = nv;
        }
      }
      if (step < opts.step_tol) {
        this_converged = true;
        break;
      }
    }

    const double s = eval(st);
    best.local_optima.push_back(s);
    best.converged = best.converged && this_converged;
    if (s > best.s_star) {
      best.s_star = s;
      best.settings = st;
    }
  }
  return best;
}

/// Deterministic enumeration of the hybrid-model vertices: per partition,
/// one party answers deterministically on its own setting while the other
/// two answer jointly (and possibly signaling within the pair) on theirs.
/// 3 partitions x 4 single strategies x 256 pair strategies = 3072.
inline const std::vector<Behavior>& hybrid_vertices() {
  static const std::vector<Behavior> verts = [] {
    std::vector<Behavior> vs;
    vs.reserve(3072);
    for (int part = 0; part < 3; ++part)
      for (int single = 0; single < 4; ++single)
        for (int pair = 0; pair < 256; ++pair) {
          Behavior beh;
          beh.p.fill(0.0);
          for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y)
              for (int z = 0; z < 2; ++z) {
                int abit, bbit, cbit;
                if (part == 0) {  // A alone, (B, C) jointly on (y, z)
                  abit = (single >> x) & 1;
                  const int m = 2 * y + z;
                  bbit = (pair >> (2 * m)) & 1;
                  cbit = (pair >> (2 * m + 1)) & 1;
                } else if (part == 1) {  // B alone, (C, A) jointly on (z, x)
                  bbit = (single >> y) & 1;
                  const int m = 2 * z + x;
                  cbit = (pair >> (2 * m)) & 1;
                  abit = (pair >> (2 * m + 1)) & 1;
                } else {  // C alone, (A, B) jointly on (x, y)
                  cbit = (single >> z) & 1;
                  const int m = 2 * x + y;
                  abit = (pair >> (2 * m)) & 1;
                  bbit = (pair >> (2 * m + 1)) & 1;
                }
                beh.p[Behavior::index(x, y, z, abit, bbit, cbit)] = 1.0;
              }
          vs.push_back(beh);
        }
    return vs;
  }();
  return verts;
}

/// Largest Svetlichny value any hybrid vertex reaches. Computed by
/// exhaustive enumeration, never assumed.
inline double hybrid_bound() {
  static const double bound = [] {
    double best = -1e300;
    for (const Behavior& v : hybrid_vertices())
      best = std::max(best, svetlichny_value(v));
    return best;
  }();
  return bound;
}

struct LpCertificate {
  bool feasible = false;
  std::vector<double> weights;       ///< convex weights over the vertices
  double residual = 0.0;             ///< ||V w - p||_inf for feasible points
  std::array<double, 64> functional{};  ///< separating functional when not
  double value_on_behavior = 0.0;    ///< functional . p
  double max_on_vertices = 0.0;      ///< max_j functional . V_j
};

/// Exact membership test of a behavior in the convex hull of the hybrid
/// vertices, as a phase-1 LP over all 3072 columns. Infeasibility comes with
/// a Farkas functional that exceeds its own hybrid maximum on the behavior:
/// a Bell-like certificate of full nonlocality.
inline LpCertificate hybrid_lp_feasible(const Behavior& beh,
                                        double tol = 1e-9) {
  for (int s = 0; s < 8; ++s) {
    double norm = 0.0;
    for (int o = 0; o < 8; ++o) norm += beh.p[s * 8 + o];
    if (std::abs(norm - 1.0) > 1e-9)
      throw ConfigError("hybrid_lp_feasible: behavior is not normalized");
  }

  const auto& verts = hybrid_vertices();
  const int m = 64;
  const int n = static_cast<int>(verts.size());
  Eigen::MatrixXd v(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) v(i, j) = verts[j].p[i];
  Eigen::VectorXd p(m);
  for (int i = 0; i < m; ++i) p(i) = beh.p[i];

  LpResult lp = simplex_solve(v, p, Eigen::VectorXd::Zero(n), tol);
  if (lp.status == LpResult::Status::iteration_limit)
    throw NumericalError("hybrid_lp_feasible: simplex hit iteration limit");

  LpCertificate cert;
  if (lp.status == LpResult::Status::optimal) {
    cert.feasible = true;
    cert.weights.assign(lp.x.data(), lp.x.data() + n);
    cert.residual = (v * lp.x - p).cwiseAbs().maxCoeff();
    return cert;
  }

  cert.feasible = false;
  Eigen::VectorXd y = lp.y;
  const double scale = y.cwiseAbs().maxCoeff();
  if (scale > 0.0) y /= scale;
  for (int i = 0; i < m; ++i) cert.functional[i] = y(i);
  cert.value_on_behavior = y.dot(p);
  cert.max_on_vertices = (y.transpose() * v).maxCoeff();
  return cert;
}

enum class Cut { A_BC, B_CA, C_AB };

inline Mat8 partial_transpose(const Mat8& m, Cut cut) {
  const int mask = cut == Cut::A_BC ? 4 : (cut == Cut::B_CA ? 2 : 1);
  Mat8 out;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) {
      const int rr = (r & ~mask) | (c & mask);
      const int cc = (c & ~mask) | (r & mask);
      out(r, c) = m(rr, cc);
    }
  return out;
}

/// Entanglement negativity (||rho^{T_cut}||_1 - 1) / 2 across a bipartition.
inline double negativity(const Rho8& rho, Cut cut) {
  if (std::abs(rho.m.trace().real() - 1.0) > 1e-10)
    throw ConfigError("negativity: state is not normalized");
  Mat8 pt = partial_transpose(rho.m, cut);
  pt = 0.5 * (pt + pt.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Mat8> es(pt);
  const double trace_norm = es.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, 0.5 * (trace_norm - 1.0));
}

}  // namespace trivac
