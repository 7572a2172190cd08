#pragma once

// Command implementations behind the `pcx` executable. They write to streams
// or directories so they can be driven from tests as well as from main().

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pcx/bethe.hpp"
#include "pcx/chain_predictive.hpp"
#include "pcx/error.hpp"
#include "pcx/io.hpp"
#include "pcx/predictive.hpp"
#include "pcx/scan.hpp"
#include "pcx/spin_hilbert.hpp"

namespace pcx {

enum class EngineKind { spectral, bethe };

struct RunConfig {
  ChainConfig chain{32, 1.0};
  InitialFlips flips{10, 25};
  std::vector<int> radii;  // empty: command default
  double dt = 0.2;
  double t_max = 200.0;
  std::optional<int> site;
  EngineKind engine = EngineKind::spectral;
  std::optional<TimeWindow> window;
  std::filesystem::path out_dir;
  unsigned threads = 1;

  TimeWindow equilibrium_window() const { return window.value_or(default_window(t_max)); }
};

inline constexpr double collision_hint = 9.0;

inline std::vector<int> series_radii(const RunConfig& rc) {
  return rc.radii.empty() ? std::vector<int>{1, 2, 3} : rc.radii;
}

inline std::vector<int> scan_radii(const RunConfig& rc) {
  return rc.radii.empty() ? std::vector<int>{2} : rc.radii;
}

/// Thread count from --threads, else PCX_THREADS, else the hardware.
inline unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("PCX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

inline void check_dense_size(const ChainConfig& cfg) {
  cfg.validate();
  if (cfg.sector_dimension() > max_dense_dimension) {
    throw Error(ErrorKind::resource_limit, "sector dimension " + std::to_string(cfg.sector_dimension()) +
                                               " exceeds the dense limit " + std::to_string(max_dense_dimension));
  }
}

/// Parse-time checks shared by the time-dependent commands.
inline void validate(const RunConfig& rc, bool needs_site, const std::vector<int>& radii) {
  check_dense_size(rc.chain);
  pair_index(rc.flips.n1, rc.flips.n2, rc.chain.sites);
  if (needs_site) {
    if (!rc.site) throw Error(ErrorKind::config, "--site is required");
    if (*rc.site < 1 || *rc.site > rc.chain.sites) throw Error(ErrorKind::config, "--site outside 1..N");
  }
  for (int r : radii) HorizonSpec{1, r, rc.chain.sites}.validate();
  const std::vector<double> times = time_grid(rc.dt, rc.t_max);
  if (needs_site) {
    const TimeWindow w = rc.equilibrium_window();
    const double eps = 1e-9;
    if (w.begin > w.end || w.begin < -eps || w.end > times.back() + eps) {
      throw Error(ErrorKind::config, "equilibrium window outside 0..t_max");
    }
    const auto count = std::count_if(times.begin(), times.end(),
                                     [&](double t) { return t >= w.begin - eps && t <= w.end + eps; });
    if (static_cast<std::size_t>(count) < min_window_samples) {
      throw Error(ErrorKind::config, "equilibrium window holds fewer than " + std::to_string(min_window_samples) + " samples");
    }
  }
}

using Engine = std::variant<SpectralDecomposition, BetheEvolver>;

inline Engine make_engine(const RunConfig& rc) {
  if (rc.engine == EngineKind::bethe) return BetheEvolver(rc.chain);
  return SpectralDecomposition(rc.chain);
}

// ---------------------------------------------------------------------------

/// Sector spectrum, sorted by energy. The Bethe engine adds the root class,
/// the dispersion residual, and a footer comparing against diagonalization.
inline void cmd_spectrum(const RunConfig& rc, std::ostream& os) {
  check_dense_size(rc.chain);
  const SpectralDecomposition spec(rc.chain);
  if (rc.engine == EngineKind::spectral) {
    const Eigen::MatrixXd h = build_sector_hamiltonian(rc.chain);
    write_csv_row(os, {"index", "energy_J", "eigen_residual"});
    for (Eigen::Index k = 0; k < spec.dimension(); ++k) {
      const double res = (h * spec.vectors().col(k) - spec.energies()(k) * spec.vectors().col(k)).norm();
      write_csv_row(os, {std::to_string(k), format_number(spec.energies()(k)), format_number(res)});
    }
    os << "# states," << spec.dimension() << '\n';
    return;
  }

  std::vector<BetheRoot> roots = enumerate_roots(rc.chain);
  std::stable_sort(roots.begin(), roots.end(), [](const BetheRoot& a, const BetheRoot& b) { return a.energy < b.energy; });
  write_csv_row(os, {"index", "energy_J", "class", "dispersion_residual"});
  double max_diff = 0.0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    write_csv_row(os, {std::to_string(k), format_number(roots[k].energy), to_string(roots[k].kind),
                       format_number(dispersion_residual(roots[k], rc.chain.coupling))});
    max_diff = std::max(max_diff, std::abs(roots[k].energy - spec.energies()(static_cast<Eigen::Index>(k))));
  }
  os << "# states," << roots.size() << '\n';
  os << "# max_abs_energy_difference_vs_diagonalization," << format_number(max_diff) << '\n';
}

inline bool is_default_flips(InitialFlips f) {
  return std::min(f.n1, f.n2) == 10 && std::max(f.n1, f.n2) == 25;
}

inline SiteSeries run_series(const RunConfig& rc, const Engine& engine) {
  return std::visit(
      [&](const auto& e) {
        return site_series(rc.chain, rc.flips, *rc.site, series_radii(rc), rc.dt, rc.t_max, e, rc.threads);
      },
      engine);
}

/// Per-site series CSV: t, S, one C column per radius, then '#' footer rows
/// with equilibrium statistics and (for flips 10, 25) collision-peak ratios.
inline void write_series(const RunConfig& rc, const SiteSeries& s, std::ostream& os) {
  std::vector<std::string> header{"t_hbar_over_J", "S_bits"};
  for (int r : s.radii) header.push_back("C_bits_rh" + std::to_string(r));
  write_csv_row(os, header);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::vector<std::string> row{format_number(s.times[k]), format_number(s.entropy[k])};
    for (const auto& c : s.complexity) row.push_back(format_number(c[k]));
    write_csv_row(os, row);
  }

  const TimeWindow w = rc.equilibrium_window();
  std::vector<const std::vector<double>*> columns{&s.entropy};
  for (const auto& c : s.complexity) columns.push_back(&c);
  std::vector<EquilibriumStats> stats;
  for (const auto* col : columns) stats.push_back(equilibrium_stats(s.times, *col, w));

  std::vector<std::string> mean{"# mean"}, sd{"# std_population"};
  for (const auto& st : stats) {
    mean.push_back(format_number(st.mean));
    sd.push_back(format_number(st.stddev));
  }
  os << "# window," << format_number(w.begin) << ',' << format_number(w.end) << '\n';
  write_csv_row(os, mean);
  write_csv_row(os, sd);
  if (is_default_flips(rc.flips)) {
    std::vector<std::string> ratio{"# peak_ratio_hint_9"};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      try {
        ratio.push_back(format_number(peak_ratio(s.times, *columns[c], collision_hint, stats[c])));
      } catch (const Error&) {
        ratio.push_back("none");
      }
    }
    write_csv_row(os, ratio);
  }
  os << "# conjecture_violations," << s.conjecture_violations << '\n';
}

inline void cmd_series(const RunConfig& rc, std::ostream& os) {
  validate(rc, true, series_radii(rc));
  const Engine engine = make_engine(rc);
  write_series(rc, run_series(rc, engine), os);
}

inline SpacetimeScan run_scan(const RunConfig& rc, const Engine& engine) {
  return std::visit(
      [&](const auto& e) { return spacetime_scan(rc.chain, rc.flips, scan_radii(rc), rc.dt, rc.t_max, e, rc.threads); },
      engine);
}

/// Long-format scan CSV: one row per (t, site, grid).
inline void write_scan_csv(const SpacetimeScan& scan, std::ostream& os) {
  write_csv_row(os, {"t_hbar_over_J", "site", "kind", "value_bits"});
  const auto& times = scan.entropy().times;
  const int n = scan.entropy().sites();
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int j = 1; j <= n; ++j)
      for (const auto& g : scan.grids)
        write_csv_row(os, {format_number(times[k]), std::to_string(j), g.label(), format_number(g.at(j, k))});
}

inline void write_scan_metadata(const RunConfig& rc, const SpacetimeScan& scan, std::ostream& os) {
  const auto& s = scan.entropy();
  os << "sites " << rc.chain.sites << '\n'
     << "coupling " << format_number(rc.chain.coupling) << '\n'
     << "flips " << rc.flips.n1 << ' ' << rc.flips.n2 << '\n'
     << "dt " << format_number(rc.dt) << '\n'
     << "t_max " << format_number(rc.t_max) << '\n'
     << "time_unit hbar/J\n"
     << "image_width " << s.times.size() << " (time samples, left to right)\n"
     << "image_height " << s.sites() << " (sites 1..N, top to bottom)\n"
     << "gray_scale pixel = round(255 * value_bits), values clamped to [0, 1] bit\n";
  for (const auto& g : scan.grids) os << "image " << g.label() << ".pgm\n";
  os << "conjecture_violations " << scan.violations.size() << '\n';
}

/// Writes scan.csv, one PGM per grid and scan_meta.txt into rc.out_dir.
inline SpacetimeScan cmd_scan(const RunConfig& rc) {
  validate(rc, false, scan_radii(rc));
  ensure_directory(rc.out_dir);
  const Engine engine = make_engine(rc);
  SpacetimeScan scan = run_scan(rc, engine);
  {
    auto csv = open_output(rc.out_dir / "scan.csv");
    write_scan_csv(scan, csv);
  }
  for (const auto& g : scan.grids) {
    auto img = open_output(rc.out_dir / (g.label() + ".pgm"), true);
    write_pgm(img, grid_image(g));
  }
  auto meta = open_output(rc.out_dir / "scan_meta.txt");
  write_scan_metadata(rc, scan, meta);
  return scan;
}

// ---------------------------------------------------------------------------
// Five-dimensional worked example: H_A = C^2, H_B = C^3 with |1>_B ~ |2>_B.

using ExampleCoefficients = std::array<Complex, 6>;

/// a = (1/2, 1/2, 0, 1/2, 0, 1/2)
inline ExampleCoefficients builtin_example_coefficients() {
  return {Complex(0.5), Complex(0.5), Complex(0.0), Complex(0.5), Complex(0.0), Complex(0.5)};
}

/// a1|11> + a2|12> + a3|13> + a4|21> + a5|22> + a6|23>, |ij> = |i>_A|j>_B.
inline BipartiteState example_state(const ExampleCoefficients& a) {
  BipartiteState psi{Eigen::MatrixXcd(2, 3)};
  psi.amplitudes << a[0], a[1], a[2], a[3], a[4], a[5];
  return psi;
}

inline EquivalencePartition example_partition() {
  EquivalencePartition part;
  part.dim_b = 3;
  part.add_coordinate_subspace({0, 1});
  return part;
}

struct ExampleReport {
  Eigen::MatrixXcd projector;
  Eigen::MatrixXcd coefficients;  // rows: A index; columns: beta, |3>
  Eigen::MatrixXcd rho;
  Eigen::MatrixXcd rho_predictive;
  double entropy = 0.0;
  double complexity = 0.0;
  std::size_t degenerate_phases = 0;
};

inline ExampleReport evaluate_example(const ExampleCoefficients& a) {
  const BipartiteState psi = example_state(a);
  const EquivalencePartition part = example_partition();
  const Projector proj = build_projector(part);
  PredictiveDiagnostics diag;
  ExampleReport r;
  r.projector = proj.matrix;
  r.coefficients = predictive_coefficients(psi, part, proj, &diag);
  r.rho = reduced_density(psi, Side::a);
  r.rho_predictive = reduced_density(predictive_map(psi, part), Side::a);
  r.entropy = von_neumann_entropy(r.rho);
  r.complexity = von_neumann_entropy(r.rho_predictive);
  r.degenerate_phases = diag.degenerate_phases;
  return r;
}

namespace cli_detail {

inline std::string format_complex(Complex z) {
  if (z.imag() == 0.0) return format_number(z.real());
  std::string s = format_number(z.real());
  s += (z.imag() < 0.0 ? "-" : "+");
  s += format_number(std::abs(z.imag())) + "i";
  return s;
}

inline void print_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixXcd& m) {
  os << name << " =\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << "  [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << format_complex(m(r, c));
    os << "]\n";
  }
}

}  // namespace cli_detail

inline void print_example(std::ostream& os, std::ostream& warn, const std::string& title, ExampleCoefficients a) {
  double norm2 = 0.0;
  for (const auto& x : a) norm2 += std::norm(x);
  if (!(norm2 > 0.0)) throw Error(ErrorKind::normalization, "coefficients are all zero");
  if (std::abs(norm2 - 1.0) > 1e-12) {
    warn << "warning: coefficients normalized (squared norm was " << format_number(norm2) << ")\n";
    for (auto& x : a) x /= std::sqrt(norm2);
  }
  const ExampleReport r = evaluate_example(a);
  os << "== " << title << " ==\n";
  os << "a =";
  for (const auto& x : a) os << ' ' << cli_detail::format_complex(x);
  os << '\n';
  cli_detail::print_matrix(os, "P (basis |1>_B, |2>_B, |3>_B)", r.projector);
  os << "Psi' coefficients on |1 beta>, |1 3>, |2 beta>, |2 3>:";
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index k = 0; k < 2; ++k) os << ' ' << cli_detail::format_complex(r.coefficients(i, k));
  os << '\n';
  cli_detail::print_matrix(os, "rho_A", r.rho);
  cli_detail::print_matrix(os, "rho'_A", r.rho_predictive);
  os << "S_A_bits " << format_number(r.entropy) << '\n';
  os << "C_A_bits " << format_number(r.complexity) << '\n';
  if (r.degenerate_phases > 0) {
    warn << "warning: " << r.degenerate_phases
         << " equivalence class(es) with amplitudes summing to zero; phase set to 1\n";
  }
}

inline void cmd_worked_example(const std::optional<ExampleCoefficients>& user, std::ostream& os, std::ostream& warn) {
  print_example(os, warn, "built-in coefficients", builtin_example_coefficients());
  if (user) print_example(os, warn, "user coefficients", *user);
}

/// CLI exit status for a library error.
inline int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::io: return 3;
    case ErrorKind::solver_failure:
    case ErrorKind::degenerate_root:
    case ErrorKind::completeness: return 4;
    default: return 2;
  }
}

}  // namespace pcx
