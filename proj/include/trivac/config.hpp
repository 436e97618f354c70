#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "trivac/amplitudes.hpp"
#include "trivac/common.hpp"
#include "trivac/wightman.hpp"
#include "trivac/windows.hpp"

namespace trivac {

/// One experiment: field, three detectors, filtering, analysis toggles,
/// sweep grids, output. Serialized as flat `key = value` text with dotted
/// sections; lists are comma-separated.
struct ExperimentConfig {
  FieldSpec field;
  std::array<DetectorSpec, 3> detectors;

  double filter_eta = 1.0;
  bool dominance_enabled = false;
  double dominance_s = 0.01;

  bool analysis_negativity = true;
  bool analysis_svetlichny = true;
  int svetlichny_starts = 64;
  bool analysis_lp = true;
  bool psd_project = false;

  std::uint64_t seed = 0;

  std::vector<double> sweep_l_over_t{2.0, 3.0, 4.0};
  std::vector<double> sweep_eta{};        ///< empty: just filter_eta
  std::vector<double> sweep_eps_scale{};  ///< empty: just 1

  double quad_rel_tol = 1e-9;

  std::string output_path = "out/run";
  std::string output_format = "json";  ///< json, csv or both

  bool operator==(const ExperimentConfig&) const = default;
};

inline bool operator==(const WindowSpec& a, const WindowSpec& b) {
  return a.family == b.family && a.eps0 == b.eps0 &&
         a.duration == b.duration && a.sigma == b.sigma &&
         a.band_index == b.band_index && a.boost == b.boost &&
         a.samples == b.samples;
}

inline bool operator==(const DetectorSpec& a, const DetectorSpec& b) {
  return a.id == b.id && a.position == b.position && a.omega == b.omega &&
         a.window == b.window;
}

inline bool operator==(const FieldSpec& a, const FieldSpec& b) {
  return a.mass == b.mass && a.eps_reg == b.eps_reg && a.ladder == b.ladder;
}

/// Equilateral triangle of side `side` in the z = 0 plane.
inline std::array<Eigen::Vector3d, 3> equilateral_positions(double side) {
  return {Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(side, 0.0, 0.0),
          Eigen::Vector3d(0.5 * side, 0.5 * std::sqrt(3.0) * side, 0.0)};
}

/// Baseline configuration: massless field, three identical gaussian-window
/// detectors with gap * duration = 4 on an equilateral triangle of side 3T,
/// the standard regulator ladder, and the L/T sweep {2, 3, 4}.
inline ExperimentConfig default_config() {
  ExperimentConfig cfg;
  const double dur = 2.0;
  cfg.field.mass = 0.0;
  cfg.field.eps_reg = 1e-2 * dur;
  cfg.field.ladder = {1e-2 * dur, 5e-3 * dur, 2.5e-3 * dur};
  const auto pos = equilateral_positions(3.0 * dur);
  for (int i = 0; i < 3; ++i) {
    cfg.detectors[i].id = static_cast<Det>(i);
    cfg.detectors[i].position = pos[i];
    cfg.detectors[i].omega = 2.0;
    cfg.detectors[i].window = gaussian_window(0.1, dur);
  }
  return cfg;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  return x;
}

inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad bool for " + key + ": '" + v + "'");
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

inline const char* family_name(WindowSpec::Family f) {
  switch (f) {
    case WindowSpec::Family::gaussian: return "gaussian";
    case WindowSpec::Family::raised_cosine: return "raised-cosine";
    case WindowSpec::Family::superoscillatory: return "superoscillatory";
    case WindowSpec::Family::tabulated: return "tabulated";
  }
  return "gaussian";
}

inline WindowSpec::Family family_from_name(const std::string& s) {
  if (s == "gaussian") return WindowSpec::Family::gaussian;
  if (s == "raised-cosine") return WindowSpec::Family::raised_cosine;
  if (s == "superoscillatory") return WindowSpec::Family::superoscillatory;
  if (s == "tabulated") return WindowSpec::Family::tabulated;
  throw ConfigError("config: unknown window family '" + s + "'");
}

}  // namespace detail

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::fmt;
  using detail::fmt_list;
  std::string out;
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "quad.rel_tol = " + fmt(cfg.quad_rel_tol) + "\n";
  out += "field.mass = " + fmt(cfg.field.mass) + "\n";
  out += "field.regulator = " + fmt(cfg.field.eps_reg) + "\n";
  out += "field.regulator_ladder = " + fmt_list(cfg.field.ladder) + "\n";
  for (const auto& d : cfg.detectors) {
    const std::string p = std::string("detector.") + det_name(d.id) + ".";
    out += p + "position = " + fmt(d.position.x()) + ", " +
           fmt(d.position.y()) + ", " + fmt(d.position.z()) + "\n";
    out += p + "omega = " + fmt(d.omega) + "\n";
    out += p + "window.family = " + detail::family_name(d.window.family) +
           "\n";
    out += p + "window.eps0 = " + fmt(d.window.eps0) + "\n";
    out += p + "window.duration = " + fmt(d.window.duration) + "\n";
    out += p + "window.sigma = " + fmt(d.window.sigma) + "\n";
    out += p + "window.band_index = " + std::to_string(d.window.band_index) +
           "\n";
    out += p + "window.boost = " + fmt(d.window.boost) + "\n";
    if (!d.window.samples.empty())
      out += p + "window.samples = " + fmt_list(d.window.samples) + "\n";
  }
  out += "filter.eta = " + fmt(cfg.filter_eta) + "\n";
  out += "dominance.enabled = " +
         std::string(cfg.dominance_enabled ? "true" : "false") + "\n";
  out += "dominance.s = " + fmt(cfg.dominance_s) + "\n";
  out += "analysis.negativity = " +
         std::string(cfg.analysis_negativity ? "true" : "false") + "\n";
  out += "analysis.svetlichny = " +
         std::string(cfg.analysis_svetlichny ? "true" : "false") + "\n";
  out += "analysis.svetlichny_starts = " +
         std::to_string(cfg.svetlichny_starts) + "\n";
  out += "analysis.lp_test = " +
         std::string(cfg.analysis_lp ? "true" : "false") + "\n";
  out += "analysis.psd_project = " +
         std::string(cfg.psd_project ? "true" : "false") + "\n";
  out += "sweep.l_over_t = " + fmt_list(cfg.sweep_l_over_t) + "\n";
  out += "sweep.eta = " + fmt_list(cfg.sweep_eta) + "\n";
  out += "sweep.eps_scale = " + fmt_list(cfg.sweep_eps_scale) + "\n";
  out += "output.path = " + cfg.output_path + "\n";
  out += "output.format = " + cfg.output_format + "\n";
  return out;
}

inline void validate_config(const ExperimentConfig& cfg) {
  validate_field(cfg.field);
  for (int i = 0; i < 3; ++i) {
    if (cfg.detectors[i].id != static_cast<Det>(i))
      throw ConfigError("config: detectors must be A, B, C in order");
    validate_window(cfg.detectors[i].window);
    if (!(cfg.detectors[i].omega > 0.0))
      throw ConfigError("config: detector gaps must be > 0");
  }
  if (!(cfg.filter_eta > 0.0) || cfg.filter_eta > 1.0)
    throw ConfigError("config: filter.eta must lie in (0, 1]");
  if (cfg.dominance_enabled &&
      (!(cfg.dominance_s > 0.0) || cfg.dominance_s > 1.0))
    throw ConfigError("config: dominance.s must lie in (0, 1]");
  if (cfg.svetlichny_starts < 1)
    throw ConfigError("config: analysis.svetlichny_starts must be >= 1");
  if (!(cfg.quad_rel_tol > 0.0))
    throw ConfigError("config: quad.rel_tol must be > 0");
  auto finite = [](const std::vector<double>& v, const char* name) {
    for (double x : v)
      if (!std::isfinite(x) || !(x > 0.0))
        throw ConfigError(std::string("config: ") + name +
                          " entries must be positive and finite");
  };
  finite(cfg.sweep_l_over_t, "sweep.l_over_t");
  finite(cfg.sweep_eta, "sweep.eta");
  finite(cfg.sweep_eps_scale, "sweep.eps_scale");
  for (double eta : cfg.sweep_eta)
    if (eta > 1.0) throw ConfigError("config: sweep.eta entries must be <= 1");
  if (cfg.output_format != "json" && cfg.output_format != "csv" &&
      cfg.output_format != "both")
    throw ConfigError("config: output.format must be json, csv or both");
}

inline ExperimentConfig parse_config(const std::string& text) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_list;
  ExperimentConfig cfg = default_config();
  cfg.sweep_l_over_t.clear();  // fully determined by the text

  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }

  auto take = [&kv](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::pair<bool, std::string>{false, ""};
    auto v = it->second;
    kv.erase(it);
    return std::pair<bool, std::string>{true, v};
  };

  if (auto [ok, v] = take("seed"); ok)
    cfg.seed = static_cast<std::uint64_t>(std::strtoull(v.c_str(), nullptr,
                                                        10));
  if (auto [ok, v] = take("quad.rel_tol"); ok)
    cfg.quad_rel_tol = parse_double("quad.rel_tol", v);
  if (auto [ok, v] = take("field.mass"); ok)
    cfg.field.mass = parse_double("field.mass", v);
  if (auto [ok, v] = take("field.regulator"); ok)
    cfg.field.eps_reg = parse_double("field.regulator", v);
  if (auto [ok, v] = take("field.regulator_ladder"); ok)
    cfg.field.ladder = parse_list("field.regulator_ladder", v);

  for (auto& d : cfg.detectors) {
    const std::string p = std::string("detector.") + det_name(d.id) + ".";
    if (auto [ok, v] = take(p + "position"); ok) {
      auto xyz = parse_list(p + "position", v);
      if (xyz.size() != 3)
        throw ConfigError("config: " + p + "position needs three numbers");
      d.position = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
    }
    if (auto [ok, v] = take(p + "omega"); ok)
      d.omega = parse_double(p + "omega", v);
    if (auto [ok, v] = take(p + "window.family"); ok)
      d.window.family = detail::family_from_name(v);
    if (auto [ok, v] = take(p + "window.eps0"); ok)
      d.window.eps0 = parse_double(p + "window.eps0", v);
    if (auto [ok, v] = take(p + "window.duration"); ok)
      d.window.duration = parse_double(p + "window.duration", v);
    if (auto [ok, v] = take(p + "window.sigma"); ok)
      d.window.sigma = parse_double(p + "window.sigma", v);
    if (auto [ok, v] = take(p + "window.band_index"); ok)
      d.window.band_index = static_cast<int>(
          parse_double(p + "window.band_index", v));
    if (auto [ok, v] = take(p + "window.boost"); ok)
      d.window.boost = parse_double(p + "window.boost", v);
    if (auto [ok, v] = take(p + "window.samples"); ok)
      d.window.samples = parse_list(p + "window.samples", v);
  }

  if (auto [ok, v] = take("filter.eta"); ok)
    cfg.filter_eta = parse_double("filter.eta", v);
  if (auto [ok, v] = take("dominance.enabled"); ok)
    cfg.dominance_enabled = parse_bool("dominance.enabled", v);
  if (auto [ok, v] = take("dominance.s"); ok)
    cfg.dominance_s = parse_double("dominance.s", v);
  if (auto [ok, v] = take("analysis.negativity"); ok)
    cfg.analysis_negativity = parse_bool("analysis.negativity", v);
  if (auto [ok, v] = take("analysis.svetlichny"); ok)
    cfg.analysis_svetlichny = parse_bool("analysis.svetlichny", v);
  if (auto [ok, v] = take("analysis.svetlichny_starts"); ok)
    cfg.svetlichny_starts =
        static_cast<int>(parse_double("analysis.svetlichny_starts", v));
  if (auto [ok, v] = take("analysis.lp_test"); ok)
    cfg.analysis_lp = parse_bool("analysis.lp_test", v);
  if (auto [ok, v] = take("analysis.psd_project"); ok)
    cfg.psd_project = parse_bool("analysis.psd_project", v);
  if (auto [ok, v] = take("sweep.l_over_t"); ok)
    cfg.sweep_l_over_t = parse_list("sweep.l_over_t", v);
  if (auto [ok, v] = take("sweep.eta"); ok)
    cfg.sweep_eta = parse_list("sweep.eta", v);
  if (auto [ok, v] = take("sweep.eps_scale"); ok)
    cfg.sweep_eps_scale = parse_list("sweep.eps_scale", v);
  if (auto [ok, v] = take("output.path"); ok) cfg.output_path = v;
  if (auto [ok, v] = take("output.format"); ok) cfg.output_format = v;

  if (!kv.empty())
    throw ConfigError("config: unknown key '" + kv.begin()->first + "'");

  validate_config(cfg);
  return cfg;
}

}  // namespace trivac
