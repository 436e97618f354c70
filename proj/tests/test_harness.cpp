#include <catch2/catch.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trivac/config.hpp"
#include "trivac/pipeline.hpp"

using namespace trivac;

#ifndef TRIVAC_TEST_DATA_DIR
#define TRIVAC_TEST_DATA_DIR "tests/data"
#endif

namespace {

ExperimentConfig dominance_config() {
  ExperimentConfig cfg = default_config();
  cfg.dominance_enabled = true;
  cfg.dominance_s = 0.01;
  cfg.sweep_l_over_t = {3.0};
  cfg.output_path = "out/dominance";
  return cfg;
}

}  // namespace

TEST_CASE("config serialization round-trips", "[harness]") {
  ExperimentConfig cfg = default_config();
  cfg.seed = 17;
  cfg.detectors[2].window = superosc_window(8, 3.0, 0.05, 2.0);
  cfg.sweep_eta = {0.2, 0.5, 1.0};
  cfg.sweep_eps_scale = {0.5, 1.0};
  cfg.filter_eta = 0.7;
  cfg.analysis_lp = false;
  cfg.output_format = "both";
  const ExperimentConfig back = parse_config(serialize_config(cfg));
  CHECK(back == cfg);
}

TEST_CASE("config parser rejects malformed input", "[harness]") {
  CHECK_THROWS_AS(parse_config("nonsense without equals\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("unknown.key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("field.mass = not-a-number\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("detector.A.window.family = cosmic\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("filter.eta = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("output.format = yaml\n"), ConfigError);
  // Comments and blank lines are fine.
  CHECK_NOTHROW(parse_config("# just a comment\n\nseed = 3\n"));
}

TEST_CASE("emit produces the stable schema", "[harness]") {
  const std::string empty_csv = records_to_csv({});
  CHECK(std::count(empty_csv.begin(), empty_csv.end(), '\n') == 1);
  CHECK(empty_csv.rfind("l_over_t,eta,eps_scale,", 0) == 0);

  SweepRecord rec;
  rec.l_over_t = 3.0;
  rec.S_star = 4.25;
  const std::string csv = records_to_csv({rec});
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  const auto parsed = nlohmann::json::parse(records_to_json({rec}));
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].size() == record_columns().size());
  CHECK(parsed[0]["S_star"].get<double>() == 4.25);
  CHECK(parsed[0]["status"].get<std::string>() == "ok");
}

TEST_CASE("dominance pipeline record", "[harness]") {
  const auto records = run_pipeline(dominance_config());
  REQUIRE(records.size() == 1);
  const SweepRecord& r = records[0];
  CHECK(r.status == "ok");
  CHECK(r.eta == Approx(0.1));  // sqrt(s)
  CHECK(r.trace == Approx(1.0 + 2.0 * 0.01 * 0.01).epsilon(1e-12));
  CHECK(r.purity == Approx(1.0).margin(1e-12));
  CHECK(r.fid_W == Approx(1.0).margin(1e-12));
  CHECK(r.S_star > 4.0 + 1e-3);
  CHECK(r.hybrid_bound == Approx(4.0).margin(1e-12));
  CHECK(r.lp_feasible == 0);
  const double want = std::sqrt(2.0) / 3.0;
  CHECK(r.neg_A_BC == Approx(want).margin(1e-10));
  CHECK(r.neg_B_CA == Approx(want).margin(1e-10));
  CHECK(r.neg_C_AB == Approx(want).margin(1e-10));
}

TEST_CASE("zero-coupling pipeline point is trivial", "[harness]") {
  ExperimentConfig cfg = default_config();
  for (auto& d : cfg.detectors) d.window.eps0 = 0.0;
  cfg.sweep_l_over_t = {3.0};
  const auto records = run_pipeline(cfg);
  REQUIRE(records.size() == 1);
  const SweepRecord& r = records[0];
  CHECK(r.status == "ok");
  CHECK(r.d_AA_mp == 0.0);
  CHECK(r.C == 0.0);
  CHECK(r.neg_A_BC == Approx(0.0).margin(1e-14));
  CHECK(r.neg_B_CA == Approx(0.0).margin(1e-14));
  CHECK(r.neg_C_AB == Approx(0.0).margin(1e-14));
  // A product state can reach, but never exceed, the hybrid bound.
  CHECK(r.S_star <= r.hybrid_bound + 1e-9);
  CHECK(r.lp_feasible == 1);
}

TEST_CASE("failing sweep points do not stop the run", "[harness]") {
  ExperimentConfig cfg = default_config();
  cfg.sweep_l_over_t = {0.4, 3.0};  // first point violates causality
  cfg.analysis_svetlichny = false;  // keep it quick
  cfg.analysis_lp = false;
  const auto records = run_pipeline(cfg);
  REQUIRE(records.size() == 2);
  CHECK(records[0].status != "ok");
  CHECK(std::isnan(records[0].S_star));
  CHECK(records[1].status == "ok");
  CHECK(records[1].trace == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("dominance run reproduces the golden snapshot", "[harness]") {
  const auto records = run_pipeline(dominance_config());
  const std::string got = records_to_json(records);

  std::ifstream in(std::string(TRIVAC_TEST_DATA_DIR) +
                   "/golden_dominance.json");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto want = nlohmann::json::parse(ss.str());
  const auto have = nlohmann::json::parse(got);
  REQUIRE(have.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    for (auto it = want[i].begin(); it != want[i].end(); ++it) {
      INFO("field " << it.key());
      if (it->is_number_float()) {
        const double w = it->get<double>();
        const double h = have[i][it.key()].get<double>();
        CHECK(std::abs(h - w) <= 1e-9 * std::max(1.0, std::abs(w)));
      } else {
        CHECK(have[i][it.key()] == *it);
      }
    }
  }
}

TEST_CASE("identical runs emit identical bytes", "[harness]") {
  const ExperimentConfig cfg = dominance_config();
  const std::string a = records_to_json(run_pipeline(cfg));
  const std::string b = records_to_json(run_pipeline(cfg));
  CHECK(a == b);
  CHECK(records_to_csv(run_pipeline(cfg)) ==
        records_to_csv(run_pipeline(cfg)));
}
