#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "trivac/amplitudes.hpp"
#include "trivac/common.hpp"
#include "trivac/config.hpp"
#include "trivac/nonlocality.hpp"
#include "trivac/rho.hpp"
#include "trivac/wick.hpp"

namespace trivac {

/// One sweep point. Numeric fields are NaN when the stage behind them was
/// disabled or failed; lp_feasible is -1 when the LP was not run.
struct SweepRecord {
  double l_over_t = 0.0;
  double eta = 1.0;
  double eps_scale = 1.0;

  double d_AA_mp = 0.0, d_BB_mp = 0.0, d_CC_mp = 0.0;
  double d_AB_pp = 0.0, d_BC_pp = 0.0, d_CA_pp = 0.0;
  double d_AB_mm = 0.0, d_BC_mm = 0.0, d_CA_mm = 0.0;
  double d_AB_mp = 0.0, d_BC_mp = 0.0, d_CA_mp = 0.0;
  double C = 0.0;

  double trace = 0.0;    ///< trace of the unnormalized assembled matrix
  double min_eig = 0.0;  ///< of the final normalized state
  double purity = 0.0;
  double neg_A_BC = 0.0, neg_B_CA = 0.0, neg_C_AB = 0.0;
  double fid_W = 0.0;
  double S_star = 0.0;
  double hybrid_bound = 0.0;
  int lp_feasible = -1;
  std::string status = "ok";
};

namespace detail {

inline void fill_nan_analysis(SweepRecord& rec) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.neg_A_BC = rec.neg_B_CA = rec.neg_C_AB = nan;
  rec.fid_W = rec.S_star = rec.hybrid_bound = nan;
  rec.min_eig = rec.purity = rec.trace = nan;
}

}  // namespace detail

/// Amplitudes -> Wick moments -> assembly -> filter -> normalize ->
/// {negativity, W fidelity, Svetlichny maximization, polytope LP}, for every
/// point of the configured sweep grids. A failing point records its error
/// and the sweep continues. Deterministic for a fixed config and seed.
inline std::vector<SweepRecord> run_pipeline(const ExperimentConfig& cfg) {
  validate_config(cfg);
  PairQuad quad;
  quad.outer_rel_tol = cfg.quad_rel_tol;

  const std::vector<double> l_grid =
      cfg.sweep_l_over_t.empty() ? std::vector<double>{0.0}
                                 : cfg.sweep_l_over_t;
  const std::vector<double> eta_grid =
      cfg.sweep_eta.empty() ? std::vector<double>{cfg.filter_eta}
                            : cfg.sweep_eta;
  const std::vector<double> scale_grid =
      cfg.sweep_eps_scale.empty() ? std::vector<double>{1.0}
                                  : cfg.sweep_eps_scale;

  double dur = 0.0;
  for (const auto& d : cfg.detectors)
    dur = std::max(dur, d.window.duration);

  std::vector<SweepRecord> records;
  for (double l_over_t : l_grid)
    for (double eta : eta_grid)
      for (double scale : scale_grid) {
        SweepRecord rec;
        rec.l_over_t = l_over_t;
        rec.eta = eta;
        rec.eps_scale = scale;
        try {
          AmplitudeSet amp;
          double applied_eta = eta;
          if (cfg.dominance_enabled) {
            amp = synthetic_dominance_amplitudes(cfg.dominance_s);
            applied_eta = std::sqrt(cfg.dominance_s);
            rec.eta = applied_eta;
          } else {
            auto dets = cfg.detectors;
            if (!cfg.sweep_l_over_t.empty()) {
              const auto pos = equilateral_positions(l_over_t * dur);
              for (int i = 0; i < 3; ++i) dets[i].position = pos[i];
            } else {
              rec.l_over_t =
                  (dets[0].position - dets[1].position).norm() / dur;
            }
            for (auto& d : dets) d.window.eps0 *= scale;
            amp = amplitude_set(cfg.field, dets, quad);
          }

          rec.d_AA_mp = amp.emission[0].real();
          rec.d_BB_mp = amp.emission[1].real();
          rec.d_CC_mp = amp.emission[2].real();
          rec.d_AB_pp = amp.exchange_pp[0].real();
          rec.d_BC_pp = amp.exchange_pp[1].real();
          rec.d_CA_pp = amp.exchange_pp[2].real();
          rec.d_AB_mm = amp.exchange_mm[0].real();
          rec.d_BC_mm = amp.exchange_mm[1].real();
          rec.d_CA_mm = amp.exchange_mm[2].real();
          rec.d_AB_mp = amp.overlap_mp[0].real();
          rec.d_BC_mp = amp.overlap_mp[1].real();
          rec.d_CA_mp = amp.overlap_mp[2].real();
          rec.C = amp.norm_term;

          DerivedAmplitudes drv =
              derived_amplitudes(make_pair_function(amp), amp.digest);
          Rho8 assembled = assemble(amp, drv);
          rec.trace = assembled.m.trace().real();

          Rho8 state = normalize(applied_eta < 1.0
                                     ? filter(assembled, {applied_eta})
                                     : assembled);
          auto rep = validate(state);
          rec.min_eig = rep.min_eig;
          rec.purity = rep.purity;

          if (cfg.analysis_negativity) {
            rec.neg_A_BC = negativity(state, Cut::A_BC);
            rec.neg_B_CA = negativity(state, Cut::B_CA);
            rec.neg_C_AB = negativity(state, Cut::C_AB);
          }
          auto [wrho, fid] = to_w_state(state);
          rec.fid_W = fid;

          if (cfg.analysis_svetlichny) {
            Rho8 analysis_state =
                cfg.psd_project ? psd_project(state) : state;
            SvetlichnyOpts opts;
            opts.starts = cfg.svetlichny_starts;
            opts.seed = cfg.seed;
            auto best = maximize_svetlichny(analysis_state, opts);
            rec.S_star = best.s_star;
            rec.hybrid_bound = hybrid_bound();
            if (cfg.analysis_lp) {
              Behavior beh = behavior_from_rho(analysis_state, best.settings);
              rec.lp_feasible = hybrid_lp_feasible(beh).feasible ? 1 : 0;
            }
          }
        } catch (const std::exception& e) {
          rec.status = e.what();
          detail::fill_nan_analysis(rec);
        }
        records.push_back(rec);
      }
  return records;
}

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "l_over_t", "eta",      "eps_scale", "d_AA_mp",  "d_BB_mp",
      "d_CC_mp",  "d_AB_pp",  "d_BC_pp",   "d_CA_pp",  "d_AB_mm",
      "d_BC_mm",  "d_CA_mm",  "d_AB_mp",   "d_BC_mp",  "d_CA_mp",
      "C",        "trace",    "min_eig",   "purity",   "neg_A_BC",
      "neg_B_CA", "neg_C_AB", "fid_W",     "S_star",   "hybrid_bound",
      "lp_feasible", "status"};
  return cols;
}

namespace detail {

inline std::vector<double> record_numbers(const SweepRecord& r) {
  return {r.l_over_t, r.eta,      r.eps_scale, r.d_AA_mp,  r.d_BB_mp,
          r.d_CC_mp,  r.d_AB_pp,  r.d_BC_pp,   r.d_CA_pp,  r.d_AB_mm,
          r.d_BC_mm,  r.d_CA_mm,  r.d_AB_mp,   r.d_BC_mp,  r.d_CA_mp,
          r.C,        r.trace,    r.min_eig,   r.purity,   r.neg_A_BC,
          r.neg_B_CA, r.neg_C_AB, r.fid_W,     r.S_star,   r.hybrid_bound};
}

}  // namespace detail

/// CSV with the stable column schema; one row per record, header always
/// present.
inline std::string records_to_csv(const std::vector<SweepRecord>& records) {
  std::string out;
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ",";
    out += cols[i];
  }
  out += "\n";
  char buf[40];
  for (const auto& r : records) {
    const auto nums = detail::record_numbers(r);
    for (double v : nums) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      out += ",";
    }
    out += std::to_string(r.lp_feasible);
    out += ",";
    out += r.status;
    out += "\n";
  }
  return out;
}

inline std::string records_to_json(const std::vector<SweepRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    const auto& cols = record_columns();
    const auto nums = detail::record_numbers(r);
    for (std::size_t i = 0; i < nums.size(); ++i) {
      if (std::isnan(nums[i]))
        o[cols[i]] = nullptr;
      else
        o[cols[i]] = nums[i];
    }
    o["lp_feasible"] = r.lp_feasible;
    o["status"] = r.status;
    arr.push_back(o);
  }
  return arr.dump(2) + "\n";
}

/// Write records in the requested format(s); returns the file names written.
inline std::vector<std::string> emit(const std::vector<SweepRecord>& records,
                                     const std::string& base_path,
                                     const std::string& format) {
  std::vector<std::string> written;
  auto write = [&](const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw ConfigError("emit: cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw NumericalError("emit: short write to '" + path + "'");
    written.push_back(path);
  };
  if (format == "csv" || format == "both")
    write(base_path + ".csv", records_to_csv(records));
  if (format == "json" || format == "both")
    write(base_path + ".json", records_to_json(records));
  if (written.empty())
    throw ConfigError("emit: unknown format '" + format + "'");
  return written;
}

}  // namespace trivac
