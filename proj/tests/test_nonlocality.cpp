#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "trivac/nonlocality.hpp"
#include "trivac/rho.hpp"
#include "trivac/simplex.hpp"

using namespace trivac;

namespace {

Rho8 maximally_mixed() {
  Rho8 r;
  r.m = Mat8::Identity() / 8.0;
  r.normalized = true;
  return r;
}

MeasurementSettings all_z() {
  MeasurementSettings s;
  for (auto* arr : {&s.a, &s.b, &s.c})
    for (auto& v : *arr) v = Eigen::Vector3d::UnitZ();
  return s;
}

Behavior mix(const std::vector<const Behavior*>& bs,
             const std::vector<double>& w) {
  Behavior out;
  out.p.fill(0.0);
  for (std::size_t k = 0; k < bs.size(); ++k)
    for (int i = 0; i < 64; ++i) out.p[i] += w[k] * bs[k]->p[i];
  return out;
}

/// Relabel parties of a behavior by a permutation perm (new role r is old
/// role perm[r]), with settings and outcomes carried along.
Behavior permute_parties(const Behavior& beh, const std::array<int, 3>& perm) {
  Behavior out;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int ab = 0; ab < 2; ++ab)
          for (int bb = 0; bb < 2; ++bb)
            for (int cb = 0; cb < 2; ++cb) {
              const int set[3] = {x, y, z};
              const int out_bit[3] = {ab, bb, cb};
              int pset[3], pout[3];
              for (int r = 0; r < 3; ++r) {
                pset[perm[r]] = set[r];
                pout[perm[r]] = out_bit[r];
              }
              out.p[Behavior::index(x, y, z, ab, bb, cb)] =
                  beh.p[Behavior::index(pset[0], pset[1], pset[2], pout[0],
                                        pout[1], pout[2])];
            }
  return out;
}

}  // namespace

TEST_CASE("simplex solves a small equality LP", "[simplex]") {
  Eigen::MatrixXd a(1, 2);
  a << 1.0, 1.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  Eigen::VectorXd c(2);
  c << -1.0, -2.0;
  auto res = simplex_solve(a, b, c);
  REQUIRE(res.status == LpResult::Status::optimal);
  CHECK(res.objective == Approx(-2.0));
  CHECK(res.x(1) == Approx(1.0));

  // Infeasible system with a Farkas certificate.
  Eigen::MatrixXd a2(2, 1);
  a2 << 1.0, 1.0;
  Eigen::VectorXd b2(2);
  b2 << 1.0, 2.0;  // x = 1 and x = 2 cannot both hold
  auto res2 = simplex_solve(a2, b2, Eigen::VectorXd::Zero(1));
  REQUIRE(res2.status == LpResult::Status::infeasible);
  CHECK(res2.y.dot(b2) > 1e-9);
  CHECK((res2.y.transpose() * a2)(0) <= 1e-9);
}

TEST_CASE("behavior from eigenstates and the mixed state", "[nonlocality]") {
  Rho8 ground;
  ground.m(0, 0) = 1.0;
  ground.normalized = true;
  Behavior beh = behavior_from_rho(ground, all_z());
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        // Ground is the -1 eigenstate of every z measurement.
        CHECK(beh.p[Behavior::index(x, y, z, 1, 1, 1)] ==
              Approx(1.0).margin(1e-14));
      }

  Behavior mixed = behavior_from_rho(maximally_mixed(), all_z());
  for (double v : mixed.p) CHECK(v == Approx(0.125).margin(1e-14));
}

TEST_CASE("behavior refuses non-psd states", "[nonlocality]") {
  Rho8 bad;
  bad.m = Mat8::Zero();
  bad.m(0, 0) = 1.5;
  bad.m(1, 1) = -0.5;
  CHECK_THROWS_AS(behavior_from_rho(bad, all_z()), NumericalError);
  CHECK_NOTHROW(behavior_from_rho(psd_project(bad), all_z()));
}

TEST_CASE("quantum behaviors are normalized and no-signaling",
          "[nonlocality]") {
  SplitMix64 rng(99);
  auto random_state = [&rng]() {
    Mat8 g;
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        g(r, c) = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
    Rho8 rho;
    rho.m = g * g.adjoint();
    return normalize(rho);
  };
  auto random_settings = [&rng]() {
    MeasurementSettings s;
    for (auto* arr : {&s.a, &s.b, &s.c})
      for (auto& v : *arr) {
        const double z = 1.0 - 2.0 * rng.next_double();
        const double phi = 2.0 * pi * rng.next_double();
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        v = Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
      }
    return s;
  };

  for (int trial = 0; trial < 5; ++trial) {
    Behavior beh = behavior_from_rho(random_state(), random_settings());
    for (int s = 0; s < 8; ++s) {
      double norm = 0.0;
      for (int o = 0; o < 8; ++o) {
        norm += beh.p[s * 8 + o];
        CHECK(beh.p[s * 8 + o] >= -1e-12);
      }
      CHECK(norm == Approx(1.0).margin(1e-12));
    }
    // Marginal of BC must not depend on x (and cyclic).
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int bb = 0; bb < 2; ++bb)
          for (int cb = 0; cb < 2; ++cb) {
            double m0 = 0.0, m1 = 0.0;
            for (int ab = 0; ab < 2; ++ab) {
              m0 += beh.p[Behavior::index(0, y, z, ab, bb, cb)];
              m1 += beh.p[Behavior::index(1, y, z, ab, bb, cb)];
            }
            CHECK(m0 == Approx(m1).margin(1e-10));
          }
  }
}

TEST_CASE("hybrid vertices: count, normalization, cut locality",
          "[nonlocality]") {
  const auto& verts = hybrid_vertices();
  REQUIRE(verts.size() == 3072);
  for (std::size_t v = 0; v < verts.size(); v += 97) {
    const Behavior& beh = verts[v];
    for (int s = 0; s < 8; ++s) {
      double norm = 0.0;
      for (int o = 0; o < 8; ++o) norm += beh.p[s * 8 + o];
      CHECK(norm == Approx(1.0));
    }
  }
  // First block: A|BC vertices keep the A marginal independent of (y, z).
  for (std::size_t v = 0; v < 1024; v += 13) {
    const Behavior& beh = verts[v];
    for (int x = 0; x < 2; ++x)
      for (int ab = 0; ab < 2; ++ab) {
        double ref = -1.0;
        for (int y = 0; y < 2; ++y)
          for (int z = 0; z < 2; ++z) {
            double m = 0.0;
            for (int bb = 0; bb < 2; ++bb)
              for (int cb = 0; cb < 2; ++cb)
                m += beh.p[Behavior::index(x, y, z, ab, bb, cb)];
            if (ref < 0.0)
              ref = m;
            else
              CHECK(m == Approx(ref));
          }
      }
  }
}

TEST_CASE("hybrid bound by enumeration", "[nonlocality]") {
  const double bound = hybrid_bound();
  CHECK(bound == Approx(4.0).margin(1e-12));
  CHECK(bound >= 2.0);

  // Invariant under relabeling the parties.
  for (const std::array<int, 3>& perm :
       {std::array<int, 3>{1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}}) {
    double best = -1e300;
    for (const Behavior& v : hybrid_vertices())
      best = std::max(best, svetlichny_value(permute_parties(v, perm)));
    CHECK(best == Approx(bound).margin(1e-12));
  }
}

TEST_CASE("hybrid bound agrees with the LP optimum", "[nonlocality]") {
  const auto& verts = hybrid_vertices();
  const int n = static_cast<int>(verts.size());
  Eigen::MatrixXd a(1, n);
  a.setOnes();
  Eigen::VectorXd b(1);
  b << 1.0;
  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c(j) = -svetlichny_value(verts[j]);
  auto res = simplex_solve(a, b, c);
  REQUIRE(res.status == LpResult::Status::optimal);
  CHECK(-res.objective == Approx(hybrid_bound()).margin(1e-8));
}

TEST_CASE("optimizer calibration states", "[nonlocality]") {
  SvetlichnyOpts opts;  // 64 starts, seed 0

  auto ghz = maximize_svetlichny(rho_from_state(ghz_state_vec()), opts);
  CHECK(ghz.s_star >= 4.0 * std::sqrt(2.0) - 1e-3);
  CHECK(ghz.s_star <= 4.0 * std::sqrt(2.0) + 1e-9);

  auto mixed = maximize_svetlichny(maximally_mixed(), opts);
  CHECK(std::abs(mixed.s_star) <= 1e-8);

  auto w = maximize_svetlichny(rho_from_state(w_state_vec()), opts);
  CHECK(w.s_star >= 4.30);
  CHECK(w.s_star <= 4.40);
  CHECK(w.s_star > hybrid_bound() + 1e-3);

  // Both evaluation routes agree at the optimizer's settings.
  const double via_rho = svetlichny_value(rho_from_state(w_state_vec()),
                                          w.settings);
  const Behavior beh =
      behavior_from_rho(rho_from_state(w_state_vec()), w.settings);
  CHECK(svetlichny_value(beh) == Approx(via_rho).margin(1e-12));
  CHECK(via_rho == Approx(w.s_star).margin(1e-9));
}

TEST_CASE("optimizer value shrinks linearly toward the mixed state",
          "[nonlocality]") {
  SvetlichnyOpts opts;
  opts.starts = 24;
  const Rho8 w = rho_from_state(w_state_vec());
  double prev = 1e300;
  for (double lambda : {1.0, 0.75, 0.5, 0.25}) {
    Rho8 mixed;
    mixed.m = lambda * w.m + (1.0 - lambda) * Mat8::Identity() / 8.0;
    mixed.normalized = true;
    const double s = maximize_svetlichny(mixed, opts).s_star;
    CHECK(s <= prev + 1e-9);
    prev = s;
  }
}

TEST_CASE("product behaviors are hybrid-feasible", "[nonlocality]") {
  Rho8 ground;
  ground.m(0, 0) = 1.0;
  ground.normalized = true;
  const Behavior beh = behavior_from_rho(ground, all_z());
  CHECK(svetlichny_value(beh) <= hybrid_bound() + 1e-8);
  auto cert = hybrid_lp_feasible(beh);
  CHECK(cert.feasible);
  CHECK(cert.residual <= 1e-9);
}

TEST_CASE("vertex mixtures are feasible by construction", "[nonlocality]") {
  const auto& verts = hybrid_vertices();
  SplitMix64 rng(4);
  std::vector<const Behavior*> picks;
  std::vector<double> w;
  double tot = 0.0;
  for (int k = 0; k < 10; ++k) {
    picks.push_back(&verts[rng.next_u64() % verts.size()]);
    w.push_back(0.05 + rng.next_double());
    tot += w.back();
  }
  for (double& v : w) v /= tot;
  auto cert = hybrid_lp_feasible(mix(picks, w));
  CHECK(cert.feasible);
  CHECK(cert.residual <= 1e-9);
}

TEST_CASE("W-state behavior is infeasible with a separating certificate",
          "[nonlocality]") {
  SvetlichnyOpts opts;
  const Rho8 w = rho_from_state(w_state_vec());
  auto best = maximize_svetlichny(w, opts);
  REQUIRE(best.s_star > hybrid_bound() + 1e-3);

  const Behavior beh = behavior_from_rho(w, best.settings);
  auto cert = hybrid_lp_feasible(beh);
  REQUIRE_FALSE(cert.feasible);
  // The functional separates the behavior from the whole hybrid polytope.
  CHECK(cert.value_on_behavior >
        cert.max_on_vertices + 1e-9);
}

TEST_CASE("negativity values", "[nonlocality]") {
  Rho8 ground;
  ground.m(0, 0) = 1.0;
  ground.normalized = true;
  for (Cut cut : {Cut::A_BC, Cut::B_CA, Cut::C_AB})
    CHECK(negativity(ground, cut) == Approx(0.0).margin(1e-14));

  auto [limit, f] = dominance_limit(0.5);
  const double want = std::sqrt(2.0) / 3.0;
  for (Cut cut : {Cut::A_BC, Cut::B_CA, Cut::C_AB})
    CHECK(negativity(limit, cut) == Approx(want).margin(1e-10));

  // Invariant under the local W transformation.
  auto [wrho, fid] = to_w_state(limit);
  for (Cut cut : {Cut::A_BC, Cut::B_CA, Cut::C_AB})
    CHECK(negativity(wrho, cut) ==
          Approx(negativity(limit, cut)).margin(1e-12));

  // Bell pair between A and B, C in the ground state: 1/2 across A|BC.
  Vec8 bell = Vec8::Zero();
  bell(0) = bell(6) = 1.0 / std::sqrt(2.0);
  Rho8 bellr = rho_from_state(bell);
  CHECK(negativity(bellr, Cut::A_BC) == Approx(0.5).margin(1e-12));
  CHECK(negativity(bellr, Cut::C_AB) == Approx(0.0).margin(1e-12));
}
