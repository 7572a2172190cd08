// pcx: spectrum, per-site series, spacetime scans and the 2x3 worked example.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pcx/cli.hpp"

namespace {

struct Flags {
  int sites = 32;
  double coupling = 1.0;
  std::vector<int> flips{10, 25};
  std::vector<int> radii;
  double dt = 0.2;
  double t_max = 200.0;
  std::optional<int> site;
  std::string engine = "spectral";
  std::vector<double> window;
  std::string out = "pcx_out";
  std::optional<unsigned> threads;
  std::vector<double> coefficients;
};

void add_run_options(CLI::App* cmd, Flags& f, bool with_time) {
  cmd->add_option("--sites", f.sites, "chain length N")->capture_default_str();
  cmd->add_option("--coupling", f.coupling, "exchange coupling J > 0")->capture_default_str();
  cmd->add_option("--engine", f.engine, "spectral|bethe")
      ->check(CLI::IsMember({"spectral", "bethe"}))
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (default: PCX_THREADS, else hardware)");
  if (!with_time) return;
  cmd->add_option("--flips", f.flips, "initial flipped sites a,b")->delimiter(',')->expected(2)->capture_default_str();
  cmd->add_option("--horizon", f.radii, "horizon radii r[,r...]")->delimiter(',');
  cmd->add_option("--dt", f.dt, "time step in hbar/J")->capture_default_str();
  cmd->add_option("--tmax", f.t_max, "final time in hbar/J")->capture_default_str();
}

pcx::RunConfig to_config(const Flags& f) {
  pcx::RunConfig rc;
  rc.chain = {f.sites, f.coupling};
  rc.flips = {f.flips.at(0), f.flips.at(1)};
  rc.radii = f.radii;
  rc.dt = f.dt;
  rc.t_max = f.t_max;
  rc.site = f.site;
  rc.engine = f.engine == "bethe" ? pcx::EngineKind::bethe : pcx::EngineKind::spectral;
  if (!f.window.empty()) rc.window = pcx::TimeWindow{f.window.at(0), f.window.at(1)};
  rc.out_dir = f.out;
  rc.threads = pcx::resolve_threads(f.threads);
  if (!(rc.dt > 0.0) || !(rc.t_max >= 0.0)) throw pcx::Error(pcx::ErrorKind::config, "--dt must be > 0 and --tmax >= 0");
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive complexity of single sites in the two-magnon Heisenberg chain"};
  app.require_subcommand(1);
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "two-magnon sector energies (CSV on stdout)");
  add_run_options(spectrum, f, false);

  auto* series = app.add_subcommand("series", "S and C of one site over time (CSV on stdout)");
  add_run_options(series, f, true);
  series->add_option("--site", f.site, "focal site j")->required();
  series->add_option("--eq-window", f.window, "equilibrium window t0,t1")->delimiter(',')->expected(2);

  auto* scan = app.add_subcommand("scan", "spacetime grids: scan.csv, PGM images, scan_meta.txt");
  add_run_options(scan, f, true);
  scan->add_option("--out", f.out, "output directory")->capture_default_str();

  auto* example = app.add_subcommand("worked-example", "2x3 example with |1>_B ~ |2>_B");
  example->add_option("--coefficients", f.coefficients, "a1,...,a6 (real)")->delimiter(',')->expected(6);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*example) {
      std::optional<pcx::ExampleCoefficients> user;
      if (!f.coefficients.empty()) {
        pcx::ExampleCoefficients a;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = f.coefficients[i];
        user = a;
      }
      pcx::cmd_worked_example(user, std::cout, std::cerr);
      return 0;
    }
    const pcx::RunConfig rc = to_config(f);
    if (*spectrum) pcx::cmd_spectrum(rc, std::cout);
    if (*series) pcx::cmd_series(rc, std::cout);
    if (*scan) {
      const pcx::SpacetimeScan s = pcx::cmd_scan(rc);
      std::cerr << "wrote " << s.grids.size() << " grids to " << rc.out_dir.string() << '\n';
      if (!s.violations.empty()) std::cerr << "warning: " << s.violations.size() << " cells with C > S\n";
    }
    std::cout.flush();
    if (!std::cout) return 3;
  } catch (const pcx::Error& e) {
    std::cerr << "pcx: " << e.what() << '\n';
    if (pcx::exit_code(e) == 2) std::cerr << "run with --help for usage\n";
    return pcx::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "pcx: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
