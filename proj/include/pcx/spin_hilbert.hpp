#pragma once

// Two-magnon sector of the periodic isotropic Heisenberg chain
//   H = -J sum_n S_n . S_{n+1}
// in the position basis |n1, n2> (spins flipped at sites n1 < n2, 1-based),
// plus a brute-force evolution in the full 2^N space used as an oracle.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "pcx/error.hpp"

namespace pcx {

using Complex = std::complex<double>;

/// Largest sector dimension handed to the dense eigensolver.
inline constexpr Eigen::Index max_dense_dimension = 4096;

/// Largest chain the full-space oracle will evolve (2^N amplitudes).
inline constexpr int max_full_space_sites = 12;

struct ChainConfig {
  int sites = 32;
  double coupling = 1.0;

  void validate() const {
    if (sites < 4) throw Error(ErrorKind::config, "chain needs at least 4 sites, got " + std::to_string(sites));
    if (coupling == 0.0 || !std::isfinite(coupling)) throw Error(ErrorKind::config, "coupling J must be finite and nonzero");
  }

  /// Number of two-magnon basis states, N(N-1)/2.
  Eigen::Index sector_dimension() const {
    return static_cast<Eigen::Index>(sites) * (sites - 1) / 2;
  }

  /// Energy of the fully polarized state, -J N / 4.
  double ferromagnetic_energy() const { return -coupling * sites / 4.0; }
};

struct PairIndex {
  int n1 = 0;
  int n2 = 0;
  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Zero-based lexicographic index of the pair (n1, n2), 1 <= n1 < n2 <= N.
inline Eigen::Index pair_index(int n1, int n2, int sites) {
  if (n1 < 1 || n2 > sites || n1 >= n2) {
    throw Error(ErrorKind::invalid_pair, "(" + std::to_string(n1) + "," + std::to_string(n2) +
                                             ") with N=" + std::to_string(sites));
  }
  const Eigen::Index a = n1, b = n2, n = sites;
  return (a - 1) * n - a * (a - 1) / 2 + (b - a - 1);
}

inline PairIndex pair_unindex(Eigen::Index flat, int sites) {
  const Eigen::Index dim = static_cast<Eigen::Index>(sites) * (sites - 1) / 2;
  if (flat < 0 || flat >= dim) {
    throw Error(ErrorKind::invalid_pair, "flat index " + std::to_string(flat) + " with N=" + std::to_string(sites));
  }
  int n1 = 1;
  Eigen::Index row = sites - 1;  // pairs starting at n1
  while (flat >= row) {
    flat -= row;
    ++n1;
    --row;
  }
  return {n1, n1 + 1 + static_cast<int>(flat)};
}

/// Index of a pair given in either order.
inline Eigen::Index unordered_pair_index(int a, int b, int sites) {
  return a < b ? pair_index(a, b, sites) : pair_index(b, a, sites);
}

/// Maps any integer onto the site labels 1..N.
inline int wrap_site(long long n, int sites) {
  long long m = (n - 1) % sites;
  if (m < 0) m += sites;
  return static_cast<int>(m) + 1;
}

inline int circular_distance(int a, int b, int sites) {
  int d = std::abs(a - b) % sites;
  return std::min(d, sites - d);
}

/// Amplitudes over the two-magnon position basis, indexed by pair_index.
struct SectorState {
  int sites = 0;
  Eigen::VectorXcd amplitudes;

  static SectorState basis(int n1, int n2, int sites) {
    SectorState s{sites, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sites) * (sites - 1) / 2)};
    s.amplitudes(pair_index(n1, n2, sites)) = 1.0;
    return s;
  }

  Complex at(int n1, int n2) const { return amplitudes(unordered_pair_index(n1, n2, sites)); }
  double norm() const { return amplitudes.norm(); }
};

/// Trace distance between the pure states |a><a| and |b><b|. Computed as the
/// norm of the component of b orthogonal to a, which stays accurate when the
/// states nearly coincide.
inline double pure_trace_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::shape, "trace distance of vectors with different sizes");
  const Eigen::VectorXcd ua = a.normalized();
  const Eigen::VectorXcd ub = b.normalized();
  return (ub - ua.dot(ub) * ua).norm();
}

inline double pure_trace_distance(const SectorState& a, const SectorState& b) {
  return pure_trace_distance(a.amplitudes, b.amplitudes);
}

/// Real symmetric sector Hamiltonian, energies measured from E0.
/// Each antiparallel bond costs J/2 and the flip term hops a magnon with
/// amplitude -J/2.
inline Eigen::MatrixXd build_sector_hamiltonian(const ChainConfig& cfg) {
  cfg.validate();
  const int n = cfg.sites;
  const double j = cfg.coupling;
  const Eigen::Index dim = cfg.sector_dimension();
  if (dim > max_dense_dimension) throw Error(ErrorKind::resource_limit, "sector dimension exceeds dense budget");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const PairIndex p = pair_unindex(col, n);
    const int flips[2] = {p.n1, p.n2};
    for (int k = 0; k < 2; ++k) {
      const int site = flips[k];
      const int other = flips[1 - k];
      for (int step : {-1, 1}) {
        const int target = wrap_site(site + step, n);
        if (target == other) continue;  // bond between the two magnons is parallel
        h(col, col) += j / 2.0;
        h(unordered_pair_index(target, other, n), col) += -j / 2.0;
      }
    }
  }
  return h;
}

/// Cyclic shift of all site labels by `shift`.
inline SectorState translate(const SectorState& psi, int shift) {
  SectorState out{psi.sites, Eigen::VectorXcd::Zero(psi.amplitudes.size())};
  for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i) {
    const PairIndex p = pair_unindex(i, psi.sites);
    out.amplitudes(unordered_pair_index(wrap_site(p.n1 + shift, psi.sites), wrap_site(p.n2 + shift, psi.sites), psi.sites)) =
        psi.amplitudes(i);
  }
  return out;
}

namespace detail {

template <typename Scalar>
Eigen::VectorXcd apply(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m, const Eigen::VectorXcd& x) {
  if constexpr (std::same_as<Scalar, double>) {
    Eigen::VectorXd re = m * x.real();
    Eigen::VectorXd im = m * x.imag();
    Eigen::VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
  } else {
    return m * x;
  }
}

template <typename Scalar>
Eigen::VectorXcd apply_adjoint(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m, const Eigen::VectorXcd& x) {
  if constexpr (std::same_as<Scalar, double>) {
    Eigen::VectorXd re = m.transpose() * x.real();
    Eigen::VectorXd im = m.transpose() * x.imag();
    Eigen::VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
  } else {
    return m.adjoint() * x;
  }
}

}  // namespace detail

/// Exact sector evolution through an orthonormal eigenbasis:
///   psi(t) = V exp(-i E t) V^dagger psi(0).
/// `Scalar` is double for the diagonalization backend and Complex for the
/// Bethe basis.
template <typename Scalar>
class EigenEvolver {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  EigenEvolver() = default;
  EigenEvolver(int sites, Eigen::VectorXd energies, Matrix vectors)
      : sites_(sites), energies_(std::move(energies)), vectors_(std::move(vectors)) {
    if (vectors_.rows() != vectors_.cols() || vectors_.cols() != energies_.size()) {
      throw Error(ErrorKind::shape, "eigenbasis is not square or does not match the energy list");
    }
  }

  int sites() const { return sites_; }
  Eigen::Index dimension() const { return energies_.size(); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Matrix& vectors() const { return vectors_; }

  /// Expansion coefficients <v_k|psi>.
  Eigen::VectorXcd coefficients(const SectorState& psi) const {
    check(psi);
    return detail::apply_adjoint(vectors_, psi.amplitudes);
  }

  SectorState evolve(const SectorState& psi0, double t) const {
    return from_coefficients(coefficients(psi0), t);
  }

  /// Evolves the basis state |n1, n2>; the coefficients are a row of V^dagger.
  SectorState evolve_pair(int n1, int n2, double t) const {
    const Eigen::Index row = pair_index(n1, n2, sites_);
    Eigen::VectorXcd c = vectors_.row(row).adjoint().template cast<Complex>();
    return from_coefficients(std::move(c), t);
  }

 private:
  void check(const SectorState& psi) const {
    if (psi.amplitudes.size() != dimension() || psi.sites != sites_) {
      throw Error(ErrorKind::shape, "state of dimension " + std::to_string(psi.amplitudes.size()) +
                                        " does not match eigenbasis of dimension " + std::to_string(dimension()));
    }
  }

  SectorState from_coefficients(Eigen::VectorXcd c, double t) const {
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -energies_(k) * t);
    return {sites_, detail::apply(vectors_, c)};
  }

  int sites_ = 0;
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

/// Anything that can evolve a two-magnon basis state to time t.
template <typename E>
concept EvolutionBackend = requires(const E& e, int n, double t) {
  { e.evolve_pair(n, n, t) } -> std::same_as<SectorState>;
  { e.sites() } -> std::convertible_to<int>;
};

/// Dense diagonalization of the sector Hamiltonian (eigenvalues ascending,
/// relative to E0).
class SpectralDecomposition : public EigenEvolver<double> {
 public:
  SpectralDecomposition() = default;

  explicit SpectralDecomposition(const ChainConfig& cfg) : EigenEvolver<double>(diagonalize(cfg)), config_(cfg) {}

  const ChainConfig& config() const { return config_; }

 private:
  static EigenEvolver<double> diagonalize(const ChainConfig& cfg) {
    const Eigen::MatrixXd h = build_sector_hamiltonian(cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::solver_failure, "sector diagonalization failed");
    return EigenEvolver<double>(cfg.sites, solver.eigenvalues(), solver.eigenvectors());
  }

  ChainConfig config_;
};

inline SectorState evolve(const SectorState& psi0, double t, const SpectralDecomposition& spec) {
  return spec.evolve(psi0, t);
}

/// <psi|H|psi> with H relative to E0.
inline double energy_expectation(const SectorState& psi, const Eigen::MatrixXd& h) {
  if (psi.amplitudes.size() != h.rows()) throw Error(ErrorKind::shape, "state does not match Hamiltonian");
  return psi.amplitudes.dot(detail::apply(h, psi.amplitudes)).real();
}

// ---------------------------------------------------------------------------
// Full 2^N Hilbert space. Bit (n-1) of a basis label is set when site n is
// flipped (spin down).

/// H|psi> for the full Hamiltonian, including the ferromagnetic baseline.
inline Eigen::VectorXcd apply_full_hamiltonian(const ChainConfig& cfg, const Eigen::VectorXcd& psi) {
  const int n = cfg.sites;
  const double j = cfg.coupling;
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (static_cast<std::uint64_t>(psi.size()) != dim) throw Error(ErrorKind::shape, "full-space vector has wrong size");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (std::uint64_t s = 0; s < dim; ++s) {
    const Complex amp = psi(static_cast<Eigen::Index>(s));
    if (amp == Complex{}) continue;
    double diag = 0.0;
    for (int b = 0; b < n; ++b) {
      const int c = (b + 1) % n;
      const bool up_b = ((s >> b) & 1U) == 0;
      const bool up_c = ((s >> c) & 1U) == 0;
      if (up_b == up_c) {
        diag += -j / 4.0;
      } else {
        diag += j / 4.0;
        const std::uint64_t flipped = s ^ ((std::uint64_t{1} << b) | (std::uint64_t{1} << c));
        out(static_cast<Eigen::Index>(flipped)) += -j / 2.0 * amp;
      }
    }
    out(static_cast<Eigen::Index>(s)) += diag * amp;
  }
  return out;
}

/// exp(-i (H - E0) t)|psi> in the full space by a Taylor series over short
/// steps. Independent of the sector construction.
inline Eigen::VectorXcd full_space_evolve(const ChainConfig& cfg, Eigen::VectorXcd psi, double t) {
  cfg.validate();
  if (cfg.sites > max_full_space_sites) {
    throw Error(ErrorKind::resource_limit, "full-space evolution limited to N <= " + std::to_string(max_full_space_sites));
  }
  const double e0 = cfg.ferromagnetic_energy();
  // Spectral radius of H - E0 is at most |J| N.
  const double bound = std::abs(cfg.coupling) * cfg.sites;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * bound / 0.5)));
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXcd term = psi;
    Eigen::VectorXcd sum = psi;
    for (int k = 1; k <= 40; ++k) {
      term = apply_full_hamiltonian(cfg, term) - e0 * term;
      term *= Complex(0.0, -h) / static_cast<double>(k);
      sum += term;
      if (term.norm() < 1e-18) break;
    }
    psi = std::move(sum);
  }
  return psi;
}

inline std::uint64_t pair_bits(int n1, int n2) {
  return (std::uint64_t{1} << (n1 - 1)) | (std::uint64_t{1} << (n2 - 1));
}

/// Projection of a full-space vector onto the two-magnon sector.
inline SectorState project_to_sector(const ChainConfig& cfg, const Eigen::VectorXcd& full) {
  SectorState out{cfg.sites, Eigen::VectorXcd::Zero(cfg.sector_dimension())};
  for (Eigen::Index i = 0; i < out.amplitudes.size(); ++i) {
    const PairIndex p = pair_unindex(i, cfg.sites);
    out.amplitudes(i) = full(static_cast<Eigen::Index>(pair_bits(p.n1, p.n2)));
  }
  return out;
}

/// Evolves |n1, n2> in the full 2^N space and returns its two-magnon
/// projection (not renormalized; its norm measures sector closure).
inline SectorState full_space_oracle(const ChainConfig& cfg, int n1, int n2, double t) {
  cfg.validate();
  if (cfg.sites > max_full_space_sites) {
    throw Error(ErrorKind::resource_limit, "full-space oracle limited to N <= " + std::to_string(max_full_space_sites));
  }
  pair_index(n1, n2, cfg.sites);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << cfg.sites);
  psi(static_cast<Eigen::Index>(pair_bits(n1, n2))) = 1.0;
  return project_to_sector(cfg, full_space_evolve(cfg, std::move(psi), t));
}

}  // namespace pcx
