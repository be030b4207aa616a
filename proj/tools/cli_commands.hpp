#pragma once

// Command implementations behind the wkbref executable. Each command renders
// its CSV and report into strings so the caller writes nothing on failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wkbref/wkbref.hpp"

namespace wkbref::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string command;
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> plot_data;
  bool oracle = false;
  CorrectionSource correction = CorrectionSource::closed_form;
  std::optional<double> emax;
};

struct RunOutput {
  std::string csv;
  std::string plot;
  std::string report;
  std::string error;
};

/// 12 significant digits, shortest of plain/scientific.
inline std::string fmt(double v) {
  char buf[64];
  if (v == 0.0) v = 0.0;  // no "-0"
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline std::optional<CorrectionSource> parse_correction(const std::string& name) {
  if (name == "closed") return CorrectionSource::closed_form;
  if (name == "direct") return CorrectionSource::direct_numeric;
  if (name == "basic") return CorrectionSource::basic_well;
  return std::nullopt;
}

namespace detail {

struct Loaded {
  PotentialSpec spec;
  PotentialModel model;
  double energy_scale = 0.0;  // U, or emax for unbounded wells
};

inline Loaded load(const RunConfig& cfg) {
  Loaded l{load_potential_spec(cfg.config_path), {}, 0.0};
  if (cfg.emax) l.spec.emax = cfg.emax;
  l.model = build_model(l.spec);
  if (l.model.finite()) {
    l.energy_scale = l.model.height_U;
  } else {
    if (!l.spec.emax)
      throw ConfigError(cfg.config_path.string() + ": unbounded well needs 'emax' (or --emax)");
    require(*l.spec.emax > 0.0, "emax must be positive");
    l.energy_scale = *l.spec.emax;
  }
  return l;
}

inline SolveOptions solve_options(const Loaded& l) {
  SolveOptions so;
  if (!l.model.finite()) so.eps_max = l.energy_scale;
  return so;
}

inline std::vector<double> oracle_levels(const Loaded& l, double* achieved = nullptr) {
  const OracleResult res = converge(l.model, oracle_config(l.spec, l.model));
  if (achieved) *achieved = res.achieved_tol;
  return res.levels;
}

/// Interior grid eps_i = S (i + 1) / (count + 1).
inline std::vector<double> uniform_interior(double scale, int count) {
  std::vector<double> grid;
  for (int i = 0; i < count; ++i) grid.push_back(scale * (i + 1) / (count + 1));
  return grid;
}

inline std::string spectrum_csv(const SpectrumSummary& s) {
  std::ostringstream csv;
  csv << "n,eps_wkb,eps_improved,eps_oracle,abs_err_wkb,abs_err_improved,delta_used\n";
  for (const auto& r : s.levels) {
    csv << r.n << ',' << fmt(r.eps_wkb) << ',' << fmt(r.eps_improved) << ',' << fmt(r.eps_oracle) << ','
        << fmt(r.abs_err_wkb()) << ',' << fmt(r.abs_err_improved()) << ',' << fmt(r.delta_used) << '\n';
  }
  return csv.str();
}

inline std::string mode_line(const char* mode, const ModeErrors& e, const SpectrumSummary& s) {
  std::ostringstream line;
  line << mode << ": max_abs_err=" << fmt(e.max_abs) << " mean_abs_err=" << fmt(e.mean_abs)
       << " max_rel_err=" << fmt(e.max_rel) << " levels=" << s.n_levels << " oracle_levels=" << s.oracle_count
       << " count_agree=" << (s.count_mismatch ? "no" : "yes") << '\n';
  return line.str();
}

inline std::string plot_csv(const Loaded& l, CorrectionSource source) {
  const PhaseDefect defect(l.model, source, l.energy_scale);
  std::ostringstream csv;
  csv << "eps,phi,delta1,delta\n";
  for (double eps : uniform_interior(l.energy_scale, 64)) {
    const auto v = defect.at(eps);
    csv << fmt(eps) << ',' << fmt(phase_integral(l.model, eps).phi_total) << ',' << fmt(v.delta1) << ','
        << fmt(v.delta) << '\n';
  }
  return csv.str();
}

}  // namespace detail

inline void run_spectrum(const RunConfig& cfg, RunOutput& out, bool force_oracle = false) {
  const auto l = detail::load(cfg);
  const bool with_oracle = cfg.oracle || force_oracle;
  double achieved = 0.0;
  const std::vector<double> oracle = with_oracle ? detail::oracle_levels(l, &achieved) : std::vector<double>{};
  const SpectrumSummary s = compare_spectra(l.model, oracle, cfg.correction, detail::solve_options(l));
  out.csv = detail::spectrum_csv(s);
  std::ostringstream rep;
  rep << "potential: " << (l.spec.name.empty() ? l.spec.kind : l.spec.name) << '\n';
  rep << "correction: " << to_string(cfg.correction) << '\n';
  if (s.phi_at_top) rep << "phi_at_top: " << fmt(*s.phi_at_top) << '\n';
  if (s.delta_at_top) rep << "delta_at_top: " << fmt(*s.delta_at_top) << '\n';
  rep << "levels: " << s.n_levels << '\n';
  for (const auto& r : s.levels)
    if (r.delta_frozen) rep << "note: delta frozen at an interior energy for level " << r.n << '\n';
  if (with_oracle) {
    rep << "oracle_achieved_tol: " << fmt(achieved) << '\n';
    rep << detail::mode_line("wkb", s.wkb, s);
    rep << detail::mode_line("improved", s.improved, s);
  }
  out.report = rep.str();
}

inline void run_compare(const RunConfig& cfg, RunOutput& out) {
  run_spectrum(cfg, out, true);
  if (cfg.plot_data) out.plot = detail::plot_csv(detail::load(cfg), cfg.correction);
}

inline void run_extract(const RunConfig& cfg, RunOutput& out) {
  const auto l = detail::load(cfg);
  if (!l.model.finite())
    throw ConfigError("extract: the well has no finite top; use the 'density' command for the density-based c extraction");
  const double U = l.model.height_U;
  const ExtractionReport top = extract_at_top(l.model);
  std::vector<std::pair<std::string, std::string>> rows{
      {"k", fmt(top.params.k)},           {"c", fmt(top.params.c)},
      {"b", fmt(top.params.b)},           {"g", fmt(top.params.g)},
      {"residual_b", fmt(top.residual_b)}, {"residual_g", fmt(top.residual_g)},
      {"phi_plus_top", fmt(top.phi_plus)}, {"phi_minus_top", fmt(top.phi_minus)},
      {"valid", top.valid ? "yes" : "no"},
      {"delta1_path", top.needs_direct_delta1 ? "direct_numeric" : "closed_form"}};
  for (double frac : {0.25, 0.5, 0.75}) {
    const double eps = frac * U;
    rows.emplace_back("gamma@" + fmt(eps), fmt(gamma_diagnostic(l.model, eps)));
  }
  for (double eps : default_adiabaticity_grid(l.model)) {
    const ExtractionReport at = extract_at_energy(l.model, eps);
    rows.emplace_back("b@" + fmt(eps), fmt(at.params.b));
    rows.emplace_back("g@" + fmt(eps), fmt(at.params.g));
    rows.emplace_back("adiabaticity@" + fmt(eps), at.adiabaticity ? fmt(*at.adiabaticity) : "absent");
  }
  std::ostringstream rep, csv;
  csv << "key,value\n";
  for (const auto& [k, v] : rows) {
    rep << k << ": " << v << '\n';
    csv << k << ',' << v << '\n';
  }
  out.report = rep.str();
  out.csv = csv.str();
}

inline void run_delta1(const RunConfig& cfg, RunOutput& out) {
  const auto l = detail::load(cfg);
  const PhaseDefect defect(l.model, cfg.correction, l.energy_scale);
  std::ostringstream csv;
  csv << "eps,delta1,delta,delta3,gamma\n";
  for (double eps : chebyshev_grid(0.1 * l.energy_scale, 0.9 * l.energy_scale, 9)) {
    const CorrectionSet set = defect.corrections(eps, true);
    csv << fmt(eps) << ',' << fmt(set.delta1) << ',' << fmt(set.delta_total) << ',' << fmt(set.delta3) << ','
        << fmt(set.gamma) << '\n';
  }
  out.csv = csv.str();
  out.report = "correction: " + to_string(cfg.correction) + "\n";
}

inline void run_density(const RunConfig& cfg, RunOutput& out) {
  const auto l = detail::load(cfg);
  std::ostringstream csv;
  csv << "eps,phi,state_density,c_from_density\n";
  for (double eps : detail::uniform_interior(l.energy_scale, 64)) {
    csv << fmt(eps) << ',' << fmt(phase_integral(l.model, eps).phi_total) << ','
        << fmt(state_density(l.model, eps)) << ',' << fmt(extract_c_from_density(l.model, eps)) << '\n';
  }
  out.csv = csv.str();
}

/// Samples the configured well on a symmetric odd grid reaching V >= (1 - 1e-8) U
/// on both flanks, as input for a tabulated configuration.
inline void run_generate(const RunConfig& cfg, RunOutput& out) {
  const auto l = detail::load(cfg);
  const double top = l.model.finite() ? l.model.height_U * (1.0 - 1e-8) : l.energy_scale;
  const TurningPoints tp = turning_points(l.model, top * (1.0 - 1e-12));
  const double X = std::max(-tp.x_minus, tp.x_plus) * 1.05;
  constexpr int points = 2001;
  std::ostringstream csv;
  csv << "x,V\n";
  for (int i = 0; i < points; ++i) {
    const double x = i == (points - 1) / 2 ? 0.0 : -X + 2.0 * X * i / (points - 1);
    csv << fmt(x) << ',' << fmt(l.model.evaluate(x)) << '\n';
  }
  out.csv = csv.str();
}

inline void run_oracle(const RunConfig& cfg, RunOutput& out) {
  const auto l = detail::load(cfg);
  const OracleResult res = converge(l.model, oracle_config(l.spec, l.model));
  std::ostringstream csv, rep;
  csv << "n,eps\n";
  for (std::size_t i = 0; i < res.levels.size(); ++i) csv << i << ',' << fmt(res.levels[i]) << '\n';
  rep << "achieved_tol: " << fmt(res.achieved_tol) << '\n';
  rep << "monotone_convergence: " << (res.monotone ? "yes" : "no") << '\n';
  rep << "count_stable: " << (res.count_stable ? "yes" : "no") << '\n';
  out.csv = csv.str();
  out.report = rep.str();
}

/// Dispatches a command and maps failures onto the exit-code contract.
inline int run(const RunConfig& cfg, RunOutput& out) {
  try {
    if (cfg.command == "spectrum") run_spectrum(cfg, out);
    else if (cfg.command == "compare") run_compare(cfg, out);
    else if (cfg.command == "extract") run_extract(cfg, out);
    else if (cfg.command == "delta1") run_delta1(cfg, out);
    else if (cfg.command == "density") run_density(cfg, out);
    else if (cfg.command == "generate") run_generate(cfg, out);
    else if (cfg.command == "oracle") run_oracle(cfg, out);
    else throw ConfigError("unknown command '" + cfg.command + "'");
    return kExitOk;
  } catch (const PreconditionError& e) {
    out = RunOutput{};
    out.error = std::string("error: ") + e.what();
    return kExitConfig;
  } catch (const NumericalError& e) {
    out = RunOutput{};
    out.error = std::string("numerical failure: ") + e.what();
    return kExitNumerical;
  } catch (const std::exception& e) {
    out = RunOutput{};
    out.error = std::string("numerical failure: ") + e.what();
    return kExitNumerical;
  }
}

/// Built-in benchmark configurations.
inline std::vector<PotentialSpec> benchmark_specs() {
  std::vector<PotentialSpec> specs;
  auto tanh2 = [&](const std::string& name, double U, double halfwidth, int points) {
    PotentialSpec s;
    s.name = name;
    s.kind = "tanh2";
    s.beta = 1.0;
    s.U = U;
    s.p = 1.0;
    s.oracle_halfwidth = halfwidth;
    s.oracle_points = points;
    specs.push_back(s);
  };
  tanh2("tanh2_U0.01", 0.01, 1500.0, 60001);
  tanh2("tanh2_U4", 4.0, 20.0, 4001);
  tanh2("tanh2_U25", 25.0, 20.0, 8001);
  tanh2("tanh2_U100", 100.0, 20.0, 16001);
  PotentialSpec h;
  h.name = "harmonic";
  h.kind = "harmonic";
  h.beta = 1.0;
  h.k = 1.0;
  h.emax = 10.0;
  h.oracle_halfwidth = 12.0;
  h.oracle_points = 4001;
  specs.push_back(h);
  auto pade = [&](const std::string& name, double k, double c, double b, double g) {
    PotentialSpec s;
    s.name = name;
    s.kind = "pade";
    s.beta = 1.0;
    s.k = k;
    s.c = c;
    s.b = b;
    s.g = g;
    s.oracle_halfwidth = 30.0;
    s.oracle_points = 12001;
    specs.push_back(s);
  };
  pade("pade_k2_b0.05_g0.01", 2.0, 0.04, 0.05, 0.01);
  pade("pade_k5_b0_g0.02", 5.0, 0.04, 0.0, 0.02);
  return specs;
}

inline void write_benchmark_specs(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& spec : benchmark_specs()) {
    std::ofstream f(dir / (spec.name + ".json"), std::ios::binary);
    f << to_json(spec).dump(2) << '\n';
  }
}

}  // namespace wkbref::cli
