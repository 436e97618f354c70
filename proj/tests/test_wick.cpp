#include <catch2/catch.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "trivac/amplitudes.hpp"
#include "trivac/rho.hpp"
#include "trivac/wick.hpp"

using namespace trivac;

namespace {

using Key = std::tuple<int, int, int, int>;  // (id_l, sign_l, id_r, sign_r)

Key key(const OperatorLabel& l, const OperatorLabel& r) {
  return {static_cast<int>(l.id), l.sign, static_cast<int>(r.id), r.sign};
}

/// Random complex pair table over all ordered (id, sign) pairs.
std::map<Key, cplx> random_pair_table(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::map<Key, cplx> t;
  for (int i = 0; i < 3; ++i)
    for (int si : {-1, 1})
      for (int j = 0; j < 3; ++j)
        for (int sj : {-1, 1})
          t[{i, si, j, sj}] =
              cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
  return t;
}

PairFunction table_function(const std::map<Key, cplx>& t) {
  return PairFunction{[t](const OperatorLabel& l, const OperatorLabel& r) {
    return t.at(key(l, r));
  }};
}

cplx tv(const std::map<Key, cplx>& t, Det i, int si, Det j, int sj) {
  return t.at({static_cast<int>(i), si, static_cast<int>(j), sj});
}

}  // namespace

TEST_CASE("perfect matching counts", "[wick]") {
  CHECK(pairings(2).size() == 1);
  CHECK(pairings(4).size() == 3);
  CHECK(pairings(6).size() == 15);
  CHECK(pairings(8).size() == 105);
  CHECK_THROWS_AS(pairings(3), ConfigError);
  CHECK_THROWS_AS(pairings(14), ConfigError);

  // Pairs are stored (min, max) and matchings are lexicographic.
  const auto m4 = pairings(4);
  CHECK(m4[0] == std::vector<std::pair<int, int>>{{0, 1}, {2, 3}});
  CHECK(m4[1] == std::vector<std::pair<int, int>>{{0, 2}, {1, 3}});
  CHECK(m4[2] == std::vector<std::pair<int, int>>{{0, 3}, {1, 2}});
}

TEST_CASE("odd moments vanish", "[wick]") {
  auto t = random_pair_table(3);
  const std::vector<OperatorLabel> ops{{Det::A, +1}, {Det::B, -1},
                                       {Det::C, +1}};
  CHECK(npoint(ops, table_function(t)) == cplx(0.0, 0.0));
}

TEST_CASE("four-point expansion by hand enumeration", "[wick]") {
  auto t = random_pair_table(11);
  const cplx got = npoint(
      {{Det::B, -1}, {Det::C, -1}, {Det::B, +1}, {Det::C, +1}},
      table_function(t));
  const cplx want = tv(t, Det::B, -1, Det::C, -1) * tv(t, Det::B, +1,
                                                       Det::C, +1) +
                    tv(t, Det::B, -1, Det::B, +1) * tv(t, Det::C, -1,
                                                       Det::C, +1) +
                    tv(t, Det::B, -1, Det::C, +1) * tv(t, Det::C, -1,
                                                       Det::B, +1);
  CHECK(std::abs(got - want) <= 1e-14 * std::abs(want));
}

TEST_CASE("npoint is multilinear in the pair function", "[wick]") {
  auto t = random_pair_table(17);
  auto scaled = t;
  const double lambda = 0.5;
  for (auto& [k, v] : scaled) v *= lambda;
  const std::vector<OperatorLabel> ops6{{Det::A, -1}, {Det::B, -1},
                                        {Det::C, -1}, {Det::A, +1},
                                        {Det::B, +1}, {Det::C, +1}};
  const cplx base = npoint(ops6, table_function(t));
  const cplx scl = npoint(ops6, table_function(scaled));
  CHECK(std::abs(scl - std::pow(lambda, 3.0) * base) <=
        1e-14 * std::abs(scl));
}

TEST_CASE("synthetic dominance pair set", "[wick]") {
  const double s = 0.37;
  AmplitudeSet amp = synthetic_dominance_amplitudes(s);
  DerivedAmplitudes drv = derived_amplitudes(make_pair_function(amp));
  CHECK(drv.bcbc_mmpp.real() == Approx(s * s).epsilon(1e-14));
  CHECK(drv.caca_mmpp.real() == Approx(s * s).epsilon(1e-14));
  CHECK(drv.cabc_mmpp.real() == Approx(s * s).epsilon(1e-14));
  CHECK(std::abs(drv.abab_mmpp) == 0.0);
  CHECK(std::abs(drv.abbc_mmpp) == 0.0);
  CHECK(std::abs(drv.abca_mmpp) == 0.0);
  CHECK(std::abs(drv.abcc_mmmp) == 0.0);
  CHECK(std::abs(drv.abcb_mmmp) == 0.0);
  CHECK(std::abs(drv.abca_mmmp) == 0.0);
  CHECK(std::abs(drv.abcabc_mmmppp) == 0.0);
}

TEST_CASE("zero base amplitudes give zero derived moments", "[wick]") {
  AmplitudeSet amp;
  DerivedAmplitudes drv = derived_amplitudes(make_pair_function(amp));
  CHECK(std::abs(drv.bcbc_mmpp) == 0.0);
  CHECK(std::abs(drv.abcabc_mmmppp) == 0.0);
}

TEST_CASE("undefined pairs are rejected with their name", "[wick]") {
  AmplitudeSet amp = synthetic_dominance_amplitudes(0.1);
  PairFunction pf = make_pair_function(amp);
  try {
    pf.value(OperatorLabel{Det::A, +1}, OperatorLabel{Det::A, +1});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("d_AA^++") != std::string::npos);
  }
}

TEST_CASE("symbolic expansion printing", "[wick]") {
  const auto ops = parse_label_string("d_BCBC^--++");
  CHECK(expand_string(ops) ==
        "d_BCBC^--++ = d_BC^--*d_BC^++ + d_BB^-+*d_CC^-+ + d_BC^-+*d_CB^-+");
  CHECK_THROWS_AS(parse_label_string("d_ABC^--"), ConfigError);
  CHECK_THROWS_AS(parse_label_string("nonsense"), ConfigError);
}
