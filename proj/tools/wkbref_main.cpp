#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli_commands.hpp"

namespace {

/// Writes through a sibling temporary and renames, so a failed write leaves no file.
bool write_file(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) return false;
    f << text;
    if (!f.flush()) return false;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
  return !ec;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace wkbref::cli;
  CLI::App app{"Bound-state spectra from phase integrals with reference-potential corrections"};
  app.set_help_all_flag("--help-all");

  std::string seed_dir;
  app.add_option("--seed-examples", seed_dir, "Write the built-in benchmark configurations into DIR");

  RunConfig cfg;
  std::string correction = "closed";
  std::string out_path, plot_path;
  double emax = 0.0;

  const char* commands[][2] = {
      {"spectrum", "Solve all levels in WKB and improved modes"},
      {"extract", "Recover k, c, b, g at the well top and report drift"},
      {"delta1", "Tabulate delta1, delta, delta3 and gamma"},
      {"density", "Tabulate Phi, dPhi/deps and density-based c"},
      {"generate", "Sample the configured well as x,V"},
      {"oracle", "Finite-difference reference levels"},
      {"compare", "Three-way comparison against the oracle"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", cfg.config_path, "Potential JSON document")->required();
    sub->add_option("--out", out_path, "CSV output file (stdout when absent)");
    sub->add_flag("--oracle", cfg.oracle, "Also run the diagonalization oracle");
    sub->add_option("--correction", correction, "closed | direct | basic")
        ->check(CLI::IsMember({"closed", "direct", "basic"}));
    sub->add_option("--emax", emax, "Energy ceiling for unbounded wells");
    sub->add_option("--plot-data", plot_path, "Plot series output file (compare)");
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (!seed_dir.empty()) {
    try {
      write_benchmark_specs(seed_dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    if (app.get_subcommands().empty()) return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  cfg.correction = *parse_correction(correction);
  if (!out_path.empty()) cfg.out = out_path;
  if (!plot_path.empty()) cfg.plot_data = plot_path;
  if (sub->count("--emax")) cfg.emax = emax;

  RunOutput out;
  const int code = run(cfg, out);
  if (code != kExitOk) {
    std::cerr << out.error << '\n';
    return code;
  }
  if (cfg.out) {
    if (!write_file(*cfg.out, out.csv)) {
      std::cerr << "error: cannot write " << cfg.out->string() << '\n';
      return kExitConfig;
    }
    std::cout << out.report;
  } else {
    std::cout << out.csv;
    std::cerr << out.report;
  }
  if (cfg.plot_data && !out.plot.empty()) {
    if (!write_file(*cfg.plot_data, out.plot)) {
      std::cerr << "error: cannot write " << cfg.plot_data->string() << '\n';
      return kExitConfig;
    }
  }
  return kExitOk;
}
