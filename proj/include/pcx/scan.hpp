#pragma once

// Spacetime grids of single-site entropy and complexity, late-time
// equilibrium statistics and collision-peak ratios.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcx/chain_predictive.hpp"
#include "pcx/error.hpp"
#include "pcx/spin_hilbert.hpp"

namespace pcx {

enum class GridKind { entropy, complexity };

struct SpacetimeGrid {
  GridKind kind = GridKind::entropy;
  int radius = 0;  // horizon radius for complexity grids
  std::vector<double> times;
  Eigen::MatrixXd values;  // rows: sites 1..N, columns: times

  std::string label() const { return kind == GridKind::entropy ? "S" : "C_rh" + std::to_string(radius); }
  int sites() const { return static_cast<int>(values.rows()); }
  double at(int site, std::size_t k) const { return values(site - 1, static_cast<Eigen::Index>(k)); }

  std::vector<double> row(int site) const {
    std::vector<double> r(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) r[k] = at(site, k);
    return r;
  }
};

struct ConjectureViolation {
  int site;
  int radius;
  double time;
  double entropy;
  double complexity;
};

struct SpacetimeScan {
  /// Entropy grid first, then one complexity grid per requested radius.
  std::vector<SpacetimeGrid> grids;
  std::vector<ConjectureViolation> violations;

  const SpacetimeGrid& entropy() const { return grids.front(); }
  const SpacetimeGrid& complexity(int radius) const {
    for (const auto& g : grids)
      if (g.kind == GridKind::complexity && g.radius == radius) return g;
    throw Error(ErrorKind::config, "no complexity grid for radius " + std::to_string(radius));
  }
};

/// S and C(r_h) for every site and time. Each time column is computed
/// independently, so the result does not depend on the thread count.
template <EvolutionBackend Engine>
SpacetimeScan spacetime_scan(const ChainConfig& cfg, InitialFlips flips, const std::vector<int>& radii, double dt,
                             double t_max, const Engine& engine, unsigned threads = 1) {
  cfg.validate();
  if (cfg.sector_dimension() > max_dense_dimension) throw Error(ErrorKind::resource_limit, "sector too large for a dense scan");
  pair_index(flips.n1, flips.n2, cfg.sites);
  if (engine.sites() != cfg.sites) throw Error(ErrorKind::shape, "engine built for a different chain");
  const int n = cfg.sites;

  std::vector<std::vector<PairClassification>> horizons(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j)
    for (int r : radii) horizons[static_cast<std::size_t>(j - 1)].push_back(classify_pairs({j, r, n}));

  SpacetimeScan scan;
  const std::vector<double> times = time_grid(dt, t_max);
  const auto columns = static_cast<Eigen::Index>(times.size());
  scan.grids.push_back({GridKind::entropy, 0, times, Eigen::MatrixXd::Zero(n, columns)});
  for (int r : radii) scan.grids.push_back({GridKind::complexity, r, times, Eigen::MatrixXd::Zero(n, columns)});

  parallel_for(times.size(), threads, [&](std::size_t k) {
    const SectorState b = amplitudes_b(flips.n1, flips.n2, times[k], engine);
    const auto col = static_cast<Eigen::Index>(k);
    for (int j = 1; j <= n; ++j) {
      const SiteSample x = sample_site(b, j, horizons[static_cast<std::size_t>(j - 1)]);
      scan.grids[0].values(j - 1, col) = x.entropy;
      for (std::size_t r = 0; r < radii.size(); ++r) scan.grids[r + 1].values(j - 1, col) = x.complexity[r];
    }
  });

  for (std::size_t r = 0; r < radii.size(); ++r) {
    for (int j = 1; j <= n; ++j) {
      for (Eigen::Index k = 0; k < columns; ++k) {
        const double s = scan.grids[0].values(j - 1, k);
        const double c = scan.grids[r + 1].values(j - 1, k);
        if (c > s + conjecture_slack) scan.violations.push_back({j, radii[r], times[static_cast<std::size_t>(k)], s, c});
      }
    }
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Equilibrium statistics

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

/// Second half of the run.
inline TimeWindow default_window(double t_max) { return {0.5 * t_max, t_max}; }

struct EquilibriumStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
  std::size_t samples = 0;
  TimeWindow window;
};

inline constexpr std::size_t min_window_samples = 100;

inline EquilibriumStats equilibrium_stats(std::span<const double> times, std::span<const double> values, TimeWindow window) {
  if (times.size() != values.size()) throw Error(ErrorKind::shape, "times and values differ in length");
  if (times.empty()) throw Error(ErrorKind::stats, "empty series");
  const double eps = 1e-9;
  if (window.begin > window.end || window.begin < times.front() - eps || window.end > times.back() + eps) {
    throw Error(ErrorKind::stats, "window [" + std::to_string(window.begin) + ", " + std::to_string(window.end) +
                                      "] is not inside the time grid");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= window.begin - eps && times[k] <= window.end + eps) {
      sum += values[k];
      ++count;
    }
  }
  if (count < min_window_samples) {
    throw Error(ErrorKind::stats, "window holds " + std::to_string(count) + " samples, need at least " +
                                      std::to_string(min_window_samples));
  }
  const double mean = sum / static_cast<double>(count);
  double var = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= window.begin - eps && times[k] <= window.end + eps) var += (values[k] - mean) * (values[k] - mean);
  }
  return {mean, std::sqrt(var / static_cast<double>(count)), count, window};
}

// ---------------------------------------------------------------------------
// Peaks

/// Indices of discrete local maxima. A plateau higher than both of its
/// neighbours counts once, at its first sample.
inline std::vector<std::size_t> local_maxima(std::span<const double> values) {
  std::vector<std::size_t> peaks;
  std::size_t i = 1;
  while (i + 1 < values.size()) {
    std::size_t k = i;
    while (k + 1 < values.size() && values[k + 1] == values[i]) ++k;
    if (k + 1 < values.size() && values[i - 1] < values[i] && values[k + 1] < values[i]) peaks.push_back(i);
    i = k + 1;
  }
  return peaks;
}

/// Local maximum nearest `hint` (ties toward earlier time), within
/// +-max_offset. A constant series has a flat maximum everywhere; the sample
/// nearest the hint is returned.
inline std::size_t find_peak(std::span<const double> times, std::span<const double> values, double hint,
                             double max_offset = 1.0) {
  if (times.size() != values.size() || times.empty()) throw Error(ErrorKind::shape, "times and values differ in length");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
      if (std::abs(times[k] - hint) < std::abs(times[best] - hint)) best = k;
    return best;
  }
  std::optional<std::size_t> best;
  for (std::size_t k : local_maxima(values)) {
    const double d = std::abs(times[k] - hint);
    if (d > max_offset + 1e-9) continue;
    if (!best || d < std::abs(times[*best] - hint)) best = k;
  }
  if (!best) throw Error(ErrorKind::peak_not_found, "no local maximum within " + std::to_string(max_offset) + " of t=" +
                                                        std::to_string(hint));
  return *best;
}

/// Peak value nearest `hint` divided by the equilibrium mean.
inline double peak_ratio(std::span<const double> times, std::span<const double> values, double hint,
                         const EquilibriumStats& stats) {
  if (!(stats.mean > 0.0)) throw Error(ErrorKind::stats, "equilibrium mean is not positive");
  return values[find_peak(times, values, hint)] / stats.mean;
}

/// First local maximum that rises above `threshold`.
inline std::optional<std::size_t> first_peak_above(std::span<const double> values, double threshold) {
  for (std::size_t k : local_maxima(values))
    if (values[k] > threshold) return k;
  return std::nullopt;
}

}  // namespace pcx
