#pragma once

// Single-site subsystem A = {j} of the two-magnon chain.
//
// The exterior B (all sites but j) holds one magnon when A is flipped and two
// magnons otherwise. Exterior basis states are sorted by how many of their
// flips lie inside the horizon |n - j| <= r_h (circular distance):
//   type I   - none; one class, together with the one-magnon exterior states
//              whose flip is outside (pairs (j, n), n outside)
//   type II  - exactly one; one class per inside site
//   type III - both; singletons
// Pairs (j, n) with n inside stay singletons. Because the type I class is the
// only one holding both one- and two-magnon exterior states, it alone feeds
// the coherence <down|rho'_A|up>.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pcx/error.hpp"
#include "pcx/predictive.hpp"
#include "pcx/spin_hilbert.hpp"

namespace pcx {

struct HorizonSpec {
  int site = 17;
  int radius = 1;
  int sites = 32;

  void validate() const {
    if (site < 1 || site > sites) throw Error(ErrorKind::config, "focal site " + std::to_string(site) + " outside 1..N");
    if (radius < 1) throw Error(ErrorKind::config, "horizon radius must be positive");
    if (2 * radius + 1 >= sites) {
      throw Error(ErrorKind::config, "horizon radius " + std::to_string(radius) + " covers the whole chain of " +
                                         std::to_string(sites) + " sites");
    }
  }

  bool inside(int n) const { return circular_distance(n, site, sites) <= radius; }
};

enum class PairClass { type_i, type_ii, type_iii, contains_site };

struct PairClassification {
  HorizonSpec horizon;
  /// Class of every pair, by flat index.
  std::vector<PairClass> classes;
  std::vector<Eigen::Index> type_i;
  /// Type II classes keyed by their inside site.
  std::map<int, std::vector<Eigen::Index>> type_ii;
  std::vector<Eigen::Index> type_iii;
  /// Pairs (j, n) with n outside the horizon; they join the type I class.
  std::vector<Eigen::Index> site_outside;
  /// Pairs (j, n) with n inside the horizon.
  std::vector<Eigen::Index> site_inside;
};

inline PairClassification classify_pairs(const HorizonSpec& h) {
  h.validate();
  const int n = h.sites;
  PairClassification cls;
  cls.horizon = h;
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * (n - 1) / 2;
  cls.classes.resize(static_cast<std::size_t>(dim));
  for (int r = 1; r <= n; ++r) {
    if (r != h.site && h.inside(r)) cls.type_ii[r];
  }
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const PairIndex p = pair_unindex(idx, n);
    PairClass c;
    if (p.n1 == h.site || p.n2 == h.site) {
      const int other = (p.n1 == h.site) ? p.n2 : p.n1;
      c = PairClass::contains_site;
      (h.inside(other) ? cls.site_inside : cls.site_outside).push_back(idx);
    } else {
      const bool in1 = h.inside(p.n1);
      const bool in2 = h.inside(p.n2);
      if (!in1 && !in2) {
        c = PairClass::type_i;
        cls.type_i.push_back(idx);
      } else if (in1 && in2) {
        c = PairClass::type_iii;
        cls.type_iii.push_back(idx);
      } else {
        c = PairClass::type_ii;
        cls.type_ii[in1 ? p.n1 : p.n2].push_back(idx);
      }
    }
    cls.classes[static_cast<std::size_t>(idx)] = c;
  }
  return cls;
}

/// b(n1, n2, t) = <n1, n2| exp(-iHt) |n1', n2'>.
template <EvolutionBackend Engine>
SectorState amplitudes_b(int n1p, int n2p, double t, const Engine& engine) {
  return engine.evolve_pair(n1p, n2p, t);
}

/// 2x2 reduced density matrix of one site in the basis (down, up).
struct SiteDensity {
  double p_down = 0.0;
  double p_up = 0.0;
  /// <down|rho|up>
  Complex coherence{};

  Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd m;
    m << p_down, coherence, std::conj(coherence), p_up;
    return m;
  }
};

/// Entropy of [[p0, c], [c*, p1]] from the closed-form eigenvalues
/// (p0 + p1)/2 +- sqrt((p0 - p1)^2/4 + |c|^2).
inline double qubit_entropy(double p0, double p1, double coherence_magnitude, LogBase base = LogBase::bits) {
  const double mean = 0.5 * (p0 + p1);
  const double delta = p0 - p1;
  const double radius = std::sqrt(0.25 * delta * delta + coherence_magnitude * coherence_magnitude);
  return entropy_term(mean + radius, base) + entropy_term(std::max(0.0, mean - radius), base);
}

inline double entropy(const SiteDensity& rho, LogBase base = LogBase::bits) {
  return qubit_entropy(rho.p_down, rho.p_up, std::abs(rho.coherence), base);
}

namespace chain_detail {

inline double weight(const Eigen::VectorXcd& b, const std::vector<Eigen::Index>& idx) {
  double s = 0.0;
  for (Eigen::Index i : idx) s += std::norm(b(i));
  return s;
}

inline Complex amplitude_sum(const Eigen::VectorXcd& b, const std::vector<Eigen::Index>& idx) {
  Complex s{};
  for (Eigen::Index i : idx) s += b(i);
  return s;
}

inline void check(const SectorState& b, const HorizonSpec& h) {
  if (b.sites != h.sites || b.amplitudes.size() != static_cast<Eigen::Index>(h.sites) * (h.sites - 1) / 2) {
    throw Error(ErrorKind::shape, "amplitudes do not match the horizon's chain length");
  }
}

}  // namespace chain_detail

/// Ordinary single-site reduced density. The coherence vanishes identically:
/// no exterior state is both one- and two-magnon.
inline SiteDensity rho_A_site(const SectorState& b, int site) {
  const int n = b.sites;
  if (site < 1 || site > n) throw Error(ErrorKind::config, "site outside 1..N");
  SiteDensity rho;
  for (int other = 1; other <= n; ++other) {
    if (other != site) rho.p_down += std::norm(b.amplitudes(unordered_pair_index(site, other, n)));
  }
  rho.p_up = std::max(0.0, b.amplitudes.squaredNorm() - rho.p_down);
  return rho;
}

enum class PhaseMode {
  /// Coherence carries the unit phases of the class amplitude sums.
  exact,
  /// Only |coherence|; the entropy does not depend on the phases.
  magnitude_only,
};

/// Predictive single-site density rho'_A. Diagonal equals rho_A; the
/// coherence is
///   sqrt(W_I * W_j) * phase(sum_{(j,n), n out} b) * conj(phase(sum_I b))
/// with W_I the type I weight and W_j the weight of pairs (j, n), n outside.
inline SiteDensity rho_A_predictive(const SectorState& b, const PairClassification& cls,
                                    PhaseMode mode = PhaseMode::exact, PredictiveDiagnostics* diag = nullptr) {
  chain_detail::check(b, cls.horizon);
  SiteDensity rho = rho_A_site(b, cls.horizon.site);
  const double w_out = chain_detail::weight(b.amplitudes, cls.type_i);
  const double w_site = chain_detail::weight(b.amplitudes, cls.site_outside);
  rho.coherence = std::sqrt(w_out * w_site);
  if (mode == PhaseMode::exact) {
    const Complex up = predictive_detail::unit_phase(chain_detail::amplitude_sum(b.amplitudes, cls.type_i), w_out, diag);
    const Complex down =
        predictive_detail::unit_phase(chain_detail::amplitude_sum(b.amplitudes, cls.site_outside), w_site, diag);
    rho.coherence *= down * std::conj(up);
  }
  return rho;
}

// ---------------------------------------------------------------------------
// Bridge to the generic predictive-state pipeline.
//
// Exterior basis for A = {j}: the N-1 one-magnon states |n> (n != j) first,
// then the two-magnon states of the N-1 exterior sites in lexicographic
// order. A basis: index 0 = down (flipped), 1 = up.

inline Eigen::Index exterior_dimension(int sites) {
  return static_cast<Eigen::Index>(sites - 1) + static_cast<Eigen::Index>(sites - 1) * (sites - 2) / 2;
}

namespace chain_detail {

/// Position of site n among the exterior sites (1-based), n != j.
inline int exterior_rank(int n, int site) { return n < site ? n : n - 1; }

}  // namespace chain_detail

/// Exterior index of the one-magnon state |n>.
inline Eigen::Index exterior_single(int n, int site) {
  return chain_detail::exterior_rank(n, site) - 1;
}

/// Exterior index of the two-magnon state |n1, n2> (neither equal to j).
inline Eigen::Index exterior_pair(int n1, int n2, int site, int sites) {
  const int a = chain_detail::exterior_rank(n1, site);
  const int c = chain_detail::exterior_rank(n2, site);
  return (sites - 1) + unordered_pair_index(a, c, sites - 1);
}

inline BipartiteState to_bipartite(const SectorState& b, int site) {
  const int n = b.sites;
  BipartiteState psi{Eigen::MatrixXcd::Zero(2, exterior_dimension(n))};
  for (Eigen::Index idx = 0; idx < b.amplitudes.size(); ++idx) {
    const PairIndex p = pair_unindex(idx, n);
    if (p.n1 == site) {
      psi.amplitudes(0, exterior_single(p.n2, site)) = b.amplitudes(idx);
    } else if (p.n2 == site) {
      psi.amplitudes(0, exterior_single(p.n1, site)) = b.amplitudes(idx);
    } else {
      psi.amplitudes(1, exterior_pair(p.n1, p.n2, site, n)) = b.amplitudes(idx);
    }
  }
  return psi;
}

/// Horizon equivalence classes as a generic partition of the exterior space.
/// Classes with fewer than two members are left in the remainder.
inline EquivalencePartition horizon_partition(const PairClassification& cls) {
  const HorizonSpec& h = cls.horizon;
  const int n = h.sites;
  EquivalencePartition part;
  part.dim_b = exterior_dimension(n);

  const auto exterior_of = [&](Eigen::Index flat) {
    const PairIndex p = pair_unindex(flat, n);
    if (p.n1 == h.site) return exterior_single(p.n2, h.site);
    if (p.n2 == h.site) return exterior_single(p.n1, h.site);
    return exterior_pair(p.n1, p.n2, h.site, n);
  };
  const auto add = [&](const std::vector<Eigen::Index>& flats) {
    if (flats.size() < 2) return;
    std::vector<Eigen::Index> ext;
    for (Eigen::Index f : flats) ext.push_back(exterior_of(f));
    part.add_coordinate_subspace(ext);
  };

  std::vector<Eigen::Index> outside = cls.type_i;
  outside.insert(outside.end(), cls.site_outside.begin(), cls.site_outside.end());
  add(outside);
  for (const auto& [inside_site, members] : cls.type_ii) add(members);
  return part;
}

/// rho'_A through the generic pipeline (predictive_map, then partial trace).
inline Eigen::MatrixXcd rho_A_predictive_generic(const SectorState& b, const PairClassification& cls) {
  const BipartiteState psi = to_bipartite(b, cls.horizon.site);
  return reduced_density(predictive_map(psi, horizon_partition(cls)), Side::a);
}

/// Full-space evolution seen as dynamics on H_A (x) H_B with A = {site}:
/// A index 0 = down, 1 = up; B index = bit pattern of the other sites in
/// increasing order (bit set = flipped).
inline BipartiteDynamics site_bipartite_dynamics(const ChainConfig& cfg, int site) {
  cfg.validate();
  if (cfg.sites > max_full_space_sites) throw Error(ErrorKind::resource_limit, "full-space dynamics limited to small N");
  const int n = cfg.sites;
  const Eigen::Index dim_b = Eigen::Index{1} << (n - 1);
  // product index (a, b) -> full-space bit pattern
  std::vector<std::uint64_t> to_full(static_cast<std::size_t>(2 * dim_b));
  for (Eigen::Index a = 0; a < 2; ++a) {
    for (Eigen::Index bb = 0; bb < dim_b; ++bb) {
      std::uint64_t bits = (a == 0) ? (std::uint64_t{1} << (site - 1)) : 0;
      int k = 0;
      for (int s = 1; s <= n; ++s) {
        if (s == site) continue;
        if ((static_cast<std::uint64_t>(bb) >> k) & 1U) bits |= std::uint64_t{1} << (s - 1);
        ++k;
      }
      to_full[static_cast<std::size_t>(a * dim_b + bb)] = bits;
    }
  }
  return [cfg, to_full = std::move(to_full)](const Eigen::VectorXcd& v, double t) {
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(v.size());
    for (std::size_t i = 0; i < to_full.size(); ++i) full(static_cast<Eigen::Index>(to_full[i])) = v(static_cast<Eigen::Index>(i));
    const Eigen::VectorXcd out = full_space_evolve(cfg, std::move(full), t);
    Eigen::VectorXcd back(v.size());
    for (std::size_t i = 0; i < to_full.size(); ++i) back(static_cast<Eigen::Index>(i)) = out(static_cast<Eigen::Index>(to_full[i]));
    return back;
  };
}

// ---------------------------------------------------------------------------
// Time series

/// Sample times 0, dt, ..., up to t_max.
inline std::vector<double> time_grid(double dt, double t_max) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::config, "time step must be positive");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw Error(ErrorKind::config, "t_max must be positive");
  const auto count = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

/// Entropy and complexities of one site at one time.
struct SiteSample {
  double entropy = 0.0;
  std::vector<double> complexity;  // one per horizon radius
};

inline constexpr double conjecture_slack = 1e-9;

/// Magnitude-only fast path shared by series and scans.
inline SiteSample sample_site(const SectorState& b, int site, const std::vector<PairClassification>& horizons) {
  const SiteDensity rho = rho_A_site(b, site);
  SiteSample out;
  out.entropy = entropy(rho);
  out.complexity.reserve(horizons.size());
  for (const auto& cls : horizons) out.complexity.push_back(entropy(rho_A_predictive(b, cls, PhaseMode::magnitude_only)));
  return out;
}

struct SiteSeries {
  int site = 0;
  std::vector<int> radii;
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<std::vector<double>> complexity;  // [radius][time]
  /// Samples where C > S + slack.
  std::size_t conjecture_violations = 0;
};

struct InitialFlips {
  int n1 = 10;
  int n2 = 25;
};

/// Runs fn(k) for k in [0, count) on up to `threads` threads, static blocks.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t block = (count + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(count, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t k = begin; k < end; ++k) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

template <EvolutionBackend Engine>
SiteSeries site_series(const ChainConfig& cfg, InitialFlips flips, int site, const std::vector<int>& radii, double dt,
                       double t_max, const Engine& engine, unsigned threads = 1) {
  cfg.validate();
  pair_index(flips.n1, flips.n2, cfg.sites);
  if (engine.sites() != cfg.sites) throw Error(ErrorKind::shape, "engine built for a different chain");
  if (site < 1 || site > cfg.sites) throw Error(ErrorKind::config, "focal site outside 1..N");
  std::vector<PairClassification> horizons;
  for (int r : radii) horizons.push_back(classify_pairs({site, r, cfg.sites}));

  SiteSeries s;
  s.site = site;
  s.radii = radii;
  s.times = time_grid(dt, t_max);
  s.entropy.assign(s.times.size(), 0.0);
  s.complexity.assign(radii.size(), std::vector<double>(s.times.size(), 0.0));
  parallel_for(s.times.size(), threads, [&](std::size_t k) {
    const SiteSample x = sample_site(amplitudes_b(flips.n1, flips.n2, s.times[k], engine), site, horizons);
    s.entropy[k] = x.entropy;
    for (std::size_t r = 0; r < radii.size(); ++r) s.complexity[r][k] = x.complexity[r];
  });
  for (std::size_t r = 0; r < radii.size(); ++r)
    for (std::size_t k = 0; k < s.times.size(); ++k)
      if (s.complexity[r][k] > s.entropy[k] + conjecture_slack) ++s.conjecture_violations;
  return s;
}

}  // namespace pcx
