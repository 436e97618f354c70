// trivac: extract and certify tripartite vacuum correlations.
//
// Subcommands: amplitudes, rho, filter, svetlichny, lp-test, sweep,
// oracle-check, windows dump, wick expand. Exit codes: 0 success,
// 1 configuration error, 2 numerical failure, 3 validation-battery failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "trivac/amplitudes.hpp"
#include "trivac/common.hpp"
#include "trivac/config.hpp"
#include "trivac/fock.hpp"
#include "trivac/nonlocality.hpp"
#include "trivac/pipeline.hpp"
#include "trivac/rho.hpp"
#include "trivac/wick.hpp"
#include "trivac/windows.hpp"

using namespace trivac;
using nlohmann::ordered_json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::int64_t seed = -1;  // -1: keep the config's seed
};

ExperimentConfig load_config(const GlobalOpts& g) {
  ExperimentConfig cfg;
  if (g.config_path.empty()) {
    cfg = default_config();
  } else {
    std::ifstream in(g.config_path);
    if (!in)
      throw ConfigError("cannot open config file '" + g.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse_config(ss.str());
  }
  if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
  if (!g.out_path.empty()) cfg.output_path = g.out_path;
  if (!g.format.empty()) cfg.output_format = g.format;
  return cfg;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << content;
}

ordered_json cplx_json(const cplx& v) {
  return ordered_json{{"re", v.real()}, {"im", v.imag()}};
}

ordered_json rho_to_json(const Rho8& rho) {
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (int r = 0; r < 8; ++r) {
    ordered_json rr = ordered_json::array(), ri = ordered_json::array();
    for (int c = 0; c < 8; ++c) {
      rr.push_back(rho.m(r, c).real());
      ri.push_back(rho.m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return ordered_json{{"basis", "ddd ddu dud duu udd udu uud uuu (A,B,C)"},
                      {"normalized", rho.normalized},
                      {"re", re},
                      {"im", im}};
}

Rho8 rho_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Rho8 rho;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      rho.m(r, c) = cplx(j.at("re").at(r).at(c).get<double>(),
                         j.at("im").at(r).at(c).get<double>());
  rho.normalized = j.value("normalized", false);
  return rho;
}

std::string rho_to_table(const Rho8& rho) {
  std::string out = "# basis ddd ddu dud duu udd udu uud uuu (A,B,C)\n";
  char buf[64];
  out += "# real part\n";
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      std::snprintf(buf, sizeof buf, "%13.6e", rho.m(r, c).real());
      out += buf;
      out += c + 1 < 8 ? " " : "\n";
    }
  }
  out += "# imaginary part\n";
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      std::snprintf(buf, sizeof buf, "%13.6e", rho.m(r, c).imag());
      out += buf;
      out += c + 1 < 8 ? " " : "\n";
    }
  }
  return out;
}

ordered_json amplitudes_to_json(const AmplitudeSet& amp) {
  ordered_json j;
  const char* pair_names[3] = {"AB", "BC", "CA"};
  const char* self_names[3] = {"AA", "BB", "CC"};
  for (int i = 0; i < 3; ++i)
    j[std::string("d_") + self_names[i] + "_mp"] = cplx_json(amp.emission[i]);
  for (int s = 0; s < 3; ++s) {
    j[std::string("d_") + pair_names[s] + "_pp"] =
        cplx_json(amp.exchange_pp[s]);
    j[std::string("d_") + pair_names[s] + "_mm"] =
        cplx_json(amp.exchange_mm[s]);
    j[std::string("d_") + pair_names[s] + "_mp"] =
        cplx_json(amp.overlap_mp[s]);
  }
  for (int i = 0; i < 3; ++i)
    j[std::string("theta_") + "ABC"[i]] = cplx_json(amp.theta[i]);
  j["C"] = amp.norm_term;
  j["provenance"] = ordered_json{{"quad_resid_max", amp.quad_resid_max},
                                 {"extrap_resid_max", amp.extrap_resid_max},
                                 {"digest", amp.digest}};
  return j;
}

std::string amplitudes_to_csv(const AmplitudeSet& amp) {
  std::string out = "name,re,im\n";
  char buf[96];
  auto row = [&](const std::string& name, const cplx& v) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", name.c_str(), v.real(),
                  v.imag());
    out += buf;
  };
  const char* pair_names[3] = {"AB", "BC", "CA"};
  const char* self_names[3] = {"AA", "BB", "CC"};
  for (int i = 0; i < 3; ++i)
    row(std::string("d_") + self_names[i] + "_mp", amp.emission[i]);
  for (int s = 0; s < 3; ++s) {
    row(std::string("d_") + pair_names[s] + "_pp", amp.exchange_pp[s]);
    row(std::string("d_") + pair_names[s] + "_mm", amp.exchange_mm[s]);
    row(std::string("d_") + pair_names[s] + "_mp", amp.overlap_mp[s]);
  }
  for (int i = 0; i < 3; ++i)
    row(std::string("theta_") + "ABC"[i], amp.theta[i]);
  std::snprintf(buf, sizeof buf, "C,%.17g,0\n", amp.norm_term);
  out += buf;
  return out;
}

ordered_json settings_to_json(const MeasurementSettings& st) {
  auto vecs = [](const std::array<Eigen::Vector3d, 2>& arr) {
    ordered_json out = ordered_json::array();
    for (const auto& v : arr)
      out.push_back(ordered_json::array({v.x(), v.y(), v.z()}));
    return out;
  };
  return ordered_json{{"a", vecs(st.a)}, {"b", vecs(st.b)}, {"c", vecs(st.c)}};
}

ordered_json behavior_to_json(const Behavior& beh) {
  ordered_json p = ordered_json::array();
  for (double v : beh.p) p.push_back(v);
  return ordered_json{
      {"order", "index = ((x*2+y)*2+z)*8 + (a*4+b*2+c), outcome bit 0 = +1"},
      {"p", p}};
}

Behavior behavior_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Behavior beh;
  const auto& p = j.at("p");
  if (p.size() != 64)
    throw ConfigError("behavior JSON needs exactly 64 probabilities");
  for (int i = 0; i < 64; ++i) beh.p[i] = p.at(i).get<double>();
  return beh;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Rho8 state_for_analysis(const ExperimentConfig& cfg, const std::string& kind,
                        const std::string& file) {
  if (kind == "dominance") return dominance_limit(cfg.dominance_s).first;
  if (kind == "file") {
    if (file.empty()) throw ConfigError("--state file needs --file <path>");
    Rho8 rho = rho_from_json_text(read_file(file));
    return rho.normalized ? rho : normalize(rho);
  }
  throw ConfigError("unknown --state '" + kind + "' (dominance|file)");
}

struct OracleCheck {
  std::string name;
  bool pass;
  double residual;
};

int run_oracle_battery(const std::string& out_path) {
  LatticeFieldSpec lat;  // three modes, n_max = 4
  std::array<DetectorSpec, 3> dets;
  dets[0] = {Det::A, Eigen::Vector3d(0.0, 0, 0), 2.0,
             gaussian_window(0.5, 2.0)};
  dets[1] = {Det::B, Eigen::Vector3d(2.1, 0, 0), 1.7,
             gaussian_window(0.4, 2.0)};
  dets[2] = {Det::C, Eigen::Vector3d(4.4, 0, 0), 2.3,
             gaussian_window(0.6, 2.0)};

  std::vector<OracleCheck> checks;

  {  // Wick expansion vs direct matrix evaluation.
    PairFunction pf = oracle_pair_function(lat, dets);
    double worst = 0.0;
    for (const char* s :
         {"d_BCBC^--++", "d_CABC^--++", "d_ABBC^--++", "d_CACA^--++",
          "d_ABCA^--++", "d_ABAB^--++", "d_ABCC^---+", "d_ABCB^---+",
          "d_ABCA^---+", "d_ABCABC^---+++"}) {
      const auto ops = parse_label_string(s);
      const cplx wick = npoint(ops, pf);
      const cplx direct = oracle_npoint(lat, dets, ops);
      worst = std::max(worst, std::abs(wick - direct) / std::abs(direct));
    }
    checks.push_back({"wick_vs_matrix", worst <= 1e-8, worst});
  }
  {  // Quadrature engine vs ladder algebra on the ring.
    PairFunction pf = oracle_pair_function(lat, dets);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int sa : {-1, +1})
          for (int sb : {-1, +1}) {
            const cplx engine =
                smeared_moment(lattice_kernel(lat, dets[i].position.x(),
                                              dets[j].position.x()),
                               {}, dets[i].window, dets[i].omega, sa,
                               dets[j].window, dets[j].omega, sb, false, {})
                    .value;
            const cplx exact = pf.value({dets[i].id, sa}, {dets[j].id, sb});
            worst =
                std::max(worst, std::abs(engine - exact) / std::abs(exact));
          }
    checks.push_back({"quadrature_vs_ladder", worst <= 1e-8, worst});
  }
  {  // Time-ordered self term.
    double worst = 0.0;
    for (const auto& d : dets) {
      const cplx exact = oracle_theta(lat, d);
      const cplx engine =
          theta_term_kernel(
              lattice_kernel(lat, d.position.x(), d.position.x()), {}, d)
              .value;
      worst = std::max(worst, std::abs(engine - exact) / std::abs(exact));
    }
    checks.push_back({"theta_vs_oracle", worst <= 1e-8, worst});
  }
  {  // Perturbative order and unitarity of the exact evolution.
    EvolveOpts opts;
    opts.steps = 512;
    EvolveDiag diag;
    auto residual = [&](double lambda) {
      Rho8 exact = exact_evolution(lat, dets, lambda, opts, &diag);
      auto sc = dets;
      for (auto& d : sc) d.window.eps0 *= lambda;
      AmplitudeSet amp = oracle_amplitude_set(lat, sc);
      DerivedAmplitudes drv =
          derived_amplitudes(oracle_pair_function(lat, sc), amp.digest);
      Rho8 pert = assemble(amp, drv);
      return (exact.m - pert.m).cwiseAbs().maxCoeff();
    };
    const double r1 = residual(0.4);
    const double r2 = residual(0.2);
    const double order = std::log2(r1 / r2);
    checks.push_back({"perturbative_order", order >= 2.5, order});
    checks.push_back({"evolution_unitarity", diag.unitarity_drift <= 1e-12,
                      diag.unitarity_drift});
  }

  ordered_json report;
  bool all = true;
  report["checks"] = ordered_json::array();
  for (const auto& c : checks) {
    report["checks"].push_back(ordered_json{
        {"name", c.name}, {"pass", c.pass}, {"residual", c.residual}});
    all = all && c.pass;
  }
  report["pass"] = all;
  write_output(out_path, report.dump(2) + "\n");
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tripartite vacuum correlation extraction and certification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "experiment configuration file");
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--out", g.out_path, "output path ('-' for stdout)");
  app.add_option("--format", g.format, "output format override");

  auto* cmd_amp = app.add_subcommand(
      "amplitudes", "second-order smeared amplitudes of the configuration");

  auto* cmd_rho =
      app.add_subcommand("rho", "assemble the three-detector density matrix");
  double rho_filter_eta = -1.0;
  double rho_dominance_s = -1.0;
  bool rho_normalize = false;
  bool rho_filter_auto = false;
  cmd_rho->add_option("--filter", rho_filter_eta,
                      "apply the ground-state filter with this eta");
  cmd_rho->add_flag(
      "--filter-auto", rho_filter_auto,
      "filter with eta^2 = sqrt(d_BC^++ * d_CA^++) from the amplitudes");
  cmd_rho->add_option("--dominance", rho_dominance_s,
                      "synthetic exchange-dominance mode with weight s");
  cmd_rho->add_flag("--normalize", rho_normalize, "normalize the trace");

  auto* cmd_filter =
      app.add_subcommand("filter", "filter a stored density matrix");
  double filter_eta = 1.0;
  std::string filter_in;
  cmd_filter->add_option("--eta", filter_eta, "filter strength in (0, 1]")
      ->required();
  cmd_filter->add_option("--in", filter_in, "density matrix JSON")
      ->required();

  auto* cmd_svet = app.add_subcommand(
      "svetlichny", "maximize the Svetlichny value of a state");
  std::string svet_state = "dominance";
  std::string svet_file;
  std::string svet_behavior_out;
  int svet_starts = -1;
  bool svet_psd = false;
  cmd_svet->add_option("--state", svet_state, "dominance|file");
  cmd_svet->add_option("--file", svet_file, "density matrix JSON");
  cmd_svet->add_option("--starts", svet_starts, "multi-start count");
  cmd_svet->add_flag("--psd-project", svet_psd,
                     "project to the PSD cone first");
  cmd_svet->add_option("--behavior-out", svet_behavior_out,
                       "write the optimal behavior JSON here");

  auto* cmd_lp =
      app.add_subcommand("lp-test", "hybrid-polytope membership of a behavior");
  std::string lp_behavior;
  cmd_lp->add_option("--behavior", lp_behavior, "behavior JSON")->required();

  auto* cmd_sweep =
      app.add_subcommand("sweep", "run the configured parameter sweep");

  auto* cmd_oracle = app.add_subcommand(
      "oracle-check", "run the lattice-oracle validation battery");

  auto* cmd_windows = app.add_subcommand("windows", "window diagnostics");
  auto* cmd_dump =
      cmd_windows->add_subcommand("dump", "sample a coupling window as CSV");
  std::string dump_det = "A";
  int dump_samples = 512;
  cmd_dump->add_option("--detector", dump_det, "A, B or C");
  cmd_dump->add_option("--samples", dump_samples, "sample count");

  auto* cmd_wick = app.add_subcommand("wick", "Wick-expansion utilities");
  auto* cmd_expand = cmd_wick->add_subcommand(
      "expand", "print the pairing expansion of an operator string");
  std::string expand_str;
  cmd_expand->add_option("string", expand_str, "e.g. d_BCBC^--++")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (cmd_amp->parsed()) {
      ExperimentConfig cfg = load_config(g);
      PairQuad quad;
      quad.outer_rel_tol = cfg.quad_rel_tol;
      AmplitudeSet amp = amplitude_set(cfg.field, cfg.detectors, quad);
      if (cfg.output_format == "csv")
        write_output(g.out_path, amplitudes_to_csv(amp));
      else
        write_output(g.out_path, amplitudes_to_json(amp).dump(2) + "\n");
    } else if (cmd_rho->parsed()) {
      ExperimentConfig cfg = load_config(g);
      Rho8 rho;
      AmplitudeSet amp;
      if (rho_dominance_s > 0.0) {
        amp = synthetic_dominance_amplitudes(rho_dominance_s);
        rho = assemble(
            amp, derived_amplitudes(make_pair_function(amp), amp.digest));
        if (rho_filter_eta < 0.0 && !rho_filter_auto)
          rho_filter_eta = std::sqrt(rho_dominance_s);
      } else {
        PairQuad quad;
        quad.outer_rel_tol = cfg.quad_rel_tol;
        amp = amplitude_set(cfg.field, cfg.detectors, quad);
        rho = assemble(
            amp, derived_amplitudes(make_pair_function(amp), amp.digest));
      }
      if (rho_filter_auto && rho_filter_eta < 0.0) {
        // eta^2 matches the exchange amplitudes involving detector C; when
        // they differ, their geometric mean stands in.
        const double bc = amp.exchange_pp[AmplitudeSet::cross_slot(
                                              Det::B, Det::C)]
                              .real();
        const double ca = amp.exchange_pp[AmplitudeSet::cross_slot(
                                              Det::C, Det::A)]
                              .real();
        if (!(bc > 0.0) || !(ca > 0.0))
          throw NumericalError(
              "--filter-auto: exchange amplitudes are not positive");
        if (std::abs(bc - ca) > 1e-6 * std::max(bc, ca))
          std::cerr << "warning: exchange amplitudes differ (d_BC^++ = " << bc
                    << ", d_CA^++ = " << ca
                    << "); using their geometric mean for eta^2\n";
        rho_filter_eta = std::min(1.0, std::pow(bc * ca, 0.25));
      }
      if (rho_filter_eta > 0.0) rho = filter(rho, {rho_filter_eta});
      if (rho_normalize) rho = normalize(rho);
      if (cfg.output_format == "table")
        write_output(g.out_path, rho_to_table(rho));
      else
        write_output(g.out_path, rho_to_json(rho).dump(2) + "\n");
    } else if (cmd_filter->parsed()) {
      Rho8 rho = rho_from_json_text(read_file(filter_in));
      write_output(g.out_path,
                   rho_to_json(filter(rho, {filter_eta})).dump(2) + "\n");
    } else if (cmd_svet->parsed()) {
      ExperimentConfig cfg = load_config(g);
      Rho8 state = state_for_analysis(cfg, svet_state, svet_file);
      if (svet_psd) state = psd_project(state);
      SvetlichnyOpts opts;
      opts.starts = svet_starts > 0 ? svet_starts : cfg.svetlichny_starts;
      opts.seed = cfg.seed;
      auto best = maximize_svetlichny(state, opts);
      const double bound = hybrid_bound();
      ordered_json out{{"S_star", best.s_star},
                       {"hybrid_bound", bound},
                       {"violated", best.s_star > bound + 1e-9},
                       {"converged", best.converged},
                       {"settings", settings_to_json(best.settings)}};
      ordered_json optima = ordered_json::array();
      for (double v : best.local_optima) optima.push_back(v);
      out["local_optima"] = optima;
      if (!svet_behavior_out.empty()) {
        Behavior beh = behavior_from_rho(state, best.settings);
        write_output(svet_behavior_out, behavior_to_json(beh).dump(2) + "\n");
      }
      write_output(g.out_path, out.dump(2) + "\n");
    } else if (cmd_lp->parsed()) {
      Behavior beh = behavior_from_json_text(read_file(lp_behavior));
      auto cert = hybrid_lp_feasible(beh);
      ordered_json out{{"feasible", cert.feasible}};
      if (cert.feasible) {
        out["residual"] = cert.residual;
        int support = 0;
        for (double w : cert.weights)
          if (w > 1e-12) ++support;
        out["support_size"] = support;
      } else {
        ordered_json f = ordered_json::array();
        for (double v : cert.functional) f.push_back(v);
        out["certificate"] =
            ordered_json{{"functional", f},
                         {"value_on_behavior", cert.value_on_behavior},
                         {"max_on_vertices", cert.max_on_vertices}};
      }
      write_output(g.out_path, out.dump(2) + "\n");
    } else if (cmd_sweep->parsed()) {
      ExperimentConfig cfg = load_config(g);
      auto records = run_pipeline(cfg);
      const auto parent = std::filesystem::path(cfg.output_path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      auto files = emit(records, cfg.output_path, cfg.output_format);
      for (const auto& f : files) std::cout << "wrote " << f << "\n";
      for (const auto& r : records)
        if (r.status != "ok")
          std::cerr << "sweep point (L/T=" << r.l_over_t << ", eta=" << r.eta
                    << ", scale=" << r.eps_scale << ") failed: " << r.status
                    << "\n";
    } else if (cmd_oracle->parsed()) {
      return run_oracle_battery(g.out_path);
    } else if (cmd_dump->parsed()) {
      ExperimentConfig cfg = load_config(g);
      const DetectorSpec& det =
          cfg.detectors[static_cast<int>(det_from_char(dump_det.at(0)))];
      if (dump_samples < 2) throw ConfigError("--samples must be >= 2");
      std::string csv = "t,eps\n";
      char buf[80];
      const double dur = det.window.duration;
      for (int k = 0; k < dump_samples; ++k) {
        const double t = -0.6 * dur + 1.2 * dur * k / (dump_samples - 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t,
                      eval_window(det.window, t));
        csv += buf;
      }
      write_output(g.out_path, csv);
    } else if (cmd_expand->parsed()) {
      const auto ops = parse_label_string(expand_str);
      write_output(g.out_path, expand_string(ops) + "\n");
    } else if (cmd_windows->parsed() || cmd_wick->parsed()) {
      std::cerr << "missing subcommand; see --help\n";
      return 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
