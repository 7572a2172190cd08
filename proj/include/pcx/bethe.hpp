#pragma once

// Bethe-ansatz eigenstates of the two-magnon sector.
//
// Each eigenstate carries a total momentum K = 2 pi m / N. Writing
// k1 = K/2 + q, k2 = K/2 - q, the wavefunction
//   a(n1, n2) = exp(i(k1 n1 + k2 n2 + theta/2)) + exp(i(k1 n2 + k2 n1 - theta/2))
// becomes exp(iK(n1 + n2)/2) f(r) with r = n2 - n1, and periodicity requires
// f(N - r) = (-1)^m f(r). Together with the contact condition at r = 1 this
// leaves one real equation in q per momentum sector:
//   cos(q(1 - N/2) + pi m/2) = cos(K/2) cos(q N/2 - pi m/2),      q in (0, pi)
// for scattering states, and a polynomial in lambda = exp(iq) in (-1, 1) for
// bound states:
//   lambda + s lambda^(N-1) = cos(K/2) (1 + s lambda^N),          s = (-1)^m.
// The k2 = 0 solutions (q = K/2, theta = 0) are present in every sector.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pcx/error.hpp"
#include "pcx/spin_hilbert.hpp"

namespace pcx {

enum class RootClass { k_zero, real_pair, bound };

inline const char* to_string(RootClass c) {
  switch (c) {
    case RootClass::k_zero: return "k-zero";
    case RootClass::real_pair: return "real-pair";
    case RootClass::bound: return "bound";
  }
  return "?";
}

struct BetheRoot {
  int momentum_number = 0;  // m, total momentum K = 2 pi m / N
  RootClass kind = RootClass::k_zero;
  /// q for k-zero and real-pair roots; lambda = exp(iq) for bound roots.
  double relative = 0.0;
  Complex k1, k2, theta;
  double energy = 0.0;  // relative to E0
  /// Bound state at K = pi, where lambda = 0 and the momenta are infinite.
  bool singular = false;
};

struct BetheState {
  BetheRoot root;
  SectorState amplitudes;
  double norm_constant = 0.0;
};

namespace bethe_detail {

inline constexpr double pi = std::numbers::pi;
inline constexpr double newton_tolerance = 1e-12;
inline constexpr int newton_max_iterations = 200;

inline Complex cot(Complex z) {
  if (std::isinf(z.imag()) || std::abs(z.imag()) > 40.0) return {0.0, z.imag() > 0.0 ? -1.0 : 1.0};
  return std::cos(z) / std::sin(z);
}

inline double half_total_cos(int m, int sites) {
  if (2 * m == sites) return 0.0;
  return std::cos(pi * m / sites);
}

/// Number of sector states with total momentum number m.
inline int momentum_sector_dimension(int sites, int m) {
  int d = (sites - 1) / 2;
  if (sites % 2 == 0 && m % 2 == 0) ++d;
  return d;
}

struct RealEquation {
  int sites;
  int m;
  double c;

  double value(double q) const {
    const double n = sites;
    return std::cos(q * (1.0 - n / 2.0) + pi * m / 2.0) - c * std::cos(q * n / 2.0 - pi * m / 2.0);
  }
  double derivative(double q) const {
    const double n = sites;
    return -(1.0 - n / 2.0) * std::sin(q * (1.0 - n / 2.0) + pi * m / 2.0) +
           c * (n / 2.0) * std::sin(q * n / 2.0 - pi * m / 2.0);
  }
};

struct BoundEquation {
  int sites;
  double s;
  double c;

  double value(double x) const {
    return x + s * std::pow(x, sites - 1) - c - c * s * std::pow(x, sites);
  }
  double derivative(double x) const {
    return 1.0 + s * (sites - 1) * std::pow(x, sites - 2) - c * s * sites * std::pow(x, sites - 1);
  }
};

/// Newton iteration kept inside a sign-change bracket; falls back to
/// bisection whenever a step leaves the bracket.
template <typename Equation>
double bracketed_newton(const Equation& eq, double lo, double hi, const std::string& cell) {
  double flo = eq.value(lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < newton_max_iterations; ++it) {
    const double fx = eq.value(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = eq.derivative(x);
    double next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step < newton_tolerance || hi - lo < newton_tolerance) {
      // one polishing step inside the bracket
      const double dd = eq.derivative(x);
      if (dd != 0.0) {
        const double polished = x - eq.value(x) / dd;
        if (polished >= lo && polished <= hi) x = polished;
      }
      return x;
    }
  }
  throw Error(ErrorKind::solver_failure, "Newton iteration did not converge in cell " + cell);
}

template <typename Equation>
std::vector<double> bracketed_roots(const Equation& eq, double a, double b, int samples, const std::string& cell) {
  std::vector<double> roots;
  double x0 = a;
  double f0 = eq.value(x0);
  for (int i = 1; i <= samples; ++i) {
    const double x1 = a + (b - a) * i / samples;
    const double f1 = eq.value(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
      roots.push_back(bracketed_newton(eq, x0, x1, cell));
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0.0) roots.push_back(x0);
  return roots;
}

}  // namespace bethe_detail

/// Scattering phase from 2 cot(theta/2) = cot(k1/2) - cot(k2/2), principal
/// branch. A vanishing momentum gives theta = 0 (the k-zero convention).
inline Complex solve_theta(Complex k1, Complex k2) {
  using bethe_detail::pi;
  const double eps = 1e-14;
  if (std::abs(std::sin(k1 / 2.0)) < eps || std::abs(std::sin(k2 / 2.0)) < eps) return {0.0, 0.0};
  const Complex rhs = (bethe_detail::cot(k1 / 2.0) - bethe_detail::cot(k2 / 2.0)) / 2.0;
  if (std::abs(rhs) < eps) return {pi, 0.0};
  return 2.0 * std::atan(1.0 / rhs);
}

/// |2 cot(theta/2) - cot(k1/2) + cot(k2/2)|, or 0 where the relation is
/// singular (vanishing momentum).
inline double theta_residual(Complex k1, Complex k2, Complex theta) {
  const double eps = 1e-14;
  if (std::abs(std::sin(k1 / 2.0)) < eps || std::abs(std::sin(k2 / 2.0)) < eps) return 0.0;
  return std::abs(2.0 * bethe_detail::cot(theta / 2.0) - bethe_detail::cot(k1 / 2.0) + bethe_detail::cot(k2 / 2.0));
}

/// J (2 - cos k1 - cos k2). Complex in general; real for genuine roots.
inline Complex dispersion(double coupling, Complex k1, Complex k2) {
  return coupling * (2.0 - std::cos(k1) - std::cos(k2));
}

/// |E - J(2 - cos k1 - cos k2)| including any imaginary part. The singular
/// bound root is evaluated in its v -> infinity limit, where the dispersion
/// tends to J.
inline double dispersion_residual(const BetheRoot& root, double coupling) {
  if (root.singular) return std::abs(root.energy - coupling);
  return std::abs(Complex(root.energy, 0.0) - dispersion(coupling, root.k1, root.k2));
}

/// All N(N-1)/2 Bethe roots, ordered by momentum number, class and relative
/// parameter.
inline std::vector<BetheRoot> enumerate_roots(const ChainConfig& cfg) {
  using bethe_detail::pi;
  cfg.validate();
  const int n = cfg.sites;
  const double j = cfg.coupling;
  std::vector<BetheRoot> roots;
  roots.reserve(static_cast<std::size_t>(cfg.sector_dimension()));

  for (int m = 0; m < n; ++m) {
    const double big_k = 2.0 * pi * m / n;
    const double c = bethe_detail::half_total_cos(m, n);
    const double s = (m % 2 == 0) ? 1.0 : -1.0;
    const int expected = bethe_detail::momentum_sector_dimension(n, m);
    const std::string cell = "m=" + std::to_string(m) + " (K=2pi*" + std::to_string(m) + "/" + std::to_string(n) + ")";

    std::vector<BetheRoot> sector;

    BetheRoot kzero;
    kzero.momentum_number = m;
    kzero.kind = RootClass::k_zero;
    kzero.relative = big_k / 2.0;
    kzero.k1 = big_k;
    kzero.k2 = 0.0;
    kzero.theta = 0.0;
    kzero.energy = j * (1.0 - std::cos(big_k));
    sector.push_back(kzero);

    const bethe_detail::RealEquation real_eq{n, m, c};
    const bethe_detail::BoundEquation bound_eq{n, s, c};
    std::vector<double> real_q;
    std::vector<double> bound_x;
    for (int refine = 1; refine <= 8; refine *= 2) {
      real_q.clear();
      bound_x.clear();
      for (double q : bethe_detail::bracketed_roots(real_eq, 0.0, pi, 64 * n * refine, cell)) {
        if (q < 1e-9 || q > pi - 1e-9) continue;          // zero wavefunction
        if (std::abs(q - big_k / 2.0) < 1e-8) continue;  // the k-zero root
        real_q.push_back(q);
      }
      if (c == 0.0) {
        bound_x.push_back(0.0);
      } else {
        for (double x : bethe_detail::bracketed_roots(bound_eq, -1.0, 1.0, 4096 * refine, cell)) {
          if (std::abs(x) > 1.0 - 1e-9) continue;
          bound_x.push_back(x);
        }
      }
      if (1 + static_cast<int>(real_q.size() + bound_x.size()) == expected) break;
    }
    const int found = 1 + static_cast<int>(real_q.size() + bound_x.size());
    if (found != expected) {
      throw Error(ErrorKind::solver_failure, "cell " + cell + ": found " + std::to_string(found) + " roots, expected " +
                                                 std::to_string(expected));
    }

    for (double q : real_q) {
      BetheRoot r;
      r.momentum_number = m;
      r.kind = RootClass::real_pair;
      r.relative = q;
      r.k1 = big_k / 2.0 + q;
      r.k2 = big_k / 2.0 - q;
      r.theta = solve_theta(r.k1, r.k2);
      r.energy = j * (2.0 - 2.0 * c * std::cos(q));
      sector.push_back(r);
    }
    for (double x : bound_x) {
      BetheRoot r;
      r.momentum_number = m;
      r.kind = RootClass::bound;
      r.relative = x;
      if (x == 0.0) {
        r.singular = true;
        const double inf = std::numeric_limits<double>::infinity();
        r.k1 = Complex(big_k / 2.0, inf);
        r.k2 = Complex(big_k / 2.0, -inf);
        r.theta = Complex(0.0, inf);
        r.energy = j;
      } else {
        // lambda = exp(iq): q = i v (lambda > 0) or pi + i v (lambda < 0)
        const Complex q = (x > 0.0) ? Complex(0.0, -std::log(x)) : Complex(pi, -std::log(-x));
        r.k1 = big_k / 2.0 + q;
        r.k2 = big_k / 2.0 - q;
        r.theta = solve_theta(r.k1, r.k2);
        r.energy = j * (2.0 - c * (x + 1.0 / x));
      }
      sector.push_back(r);
    }
    roots.insert(roots.end(), sector.begin(), sector.end());
  }
  return roots;
}

/// Unnormalized relative wavefunction f(r), r = 1..N-1.
inline double relative_wavefunction(const BetheRoot& root, int sites, int r) {
  using bethe_detail::pi;
  if (root.kind == RootClass::bound) {
    const double s = (root.momentum_number % 2 == 0) ? 1.0 : -1.0;
    const double x = root.relative;
    return std::pow(x, r - 1) + s * std::pow(x, sites - 1 - r);
  }
  return std::cos(root.relative * (r - sites / 2.0) + pi * root.momentum_number / 2.0);
}

/// Literal two-plane-wave form exp(i(k1 n1 + k2 n2 + theta/2)) +
/// exp(i(k1 n2 + k2 n1 - theta/2)); not representable for singular roots.
inline Complex plane_wave_amplitude(const BetheRoot& root, int n1, int n2) {
  const Complex i(0.0, 1.0);
  return std::exp(i * (root.k1 * double(n1) + root.k2 * double(n2) + root.theta / 2.0)) +
         std::exp(i * (root.k1 * double(n2) + root.k2 * double(n1) - root.theta / 2.0));
}

/// Normalized position-basis eigenvector of a root. Amplitudes use the
/// centered form exp(iK(n1+n2)/2) f(n2-n1), equal to the plane-wave form up
/// to a constant; `norm_constant` normalizes the plane-wave form (or the
/// centered form for singular roots).
inline BetheState bethe_state(const BetheRoot& root, const ChainConfig& cfg) {
  using bethe_detail::pi;
  cfg.validate();
  const int n = cfg.sites;
  const double big_k = 2.0 * pi * root.momentum_number / n;
  SectorState psi{n, Eigen::VectorXcd::Zero(cfg.sector_dimension())};
  for (Eigen::Index idx = 0; idx < psi.amplitudes.size(); ++idx) {
    const PairIndex p = pair_unindex(idx, n);
    psi.amplitudes(idx) = std::polar(relative_wavefunction(root, n, p.n2 - p.n1), big_k * (p.n1 + p.n2) / 2.0);
  }
  const double norm = psi.amplitudes.norm();
  if (!(norm > 1e-10)) {
    throw Error(ErrorKind::degenerate_root, "root m=" + std::to_string(root.momentum_number) + " (" +
                                                to_string(root.kind) + ") has a vanishing wavefunction");
  }
  psi.amplitudes /= norm;

  double a = 1.0 / norm;
  if (!root.singular) {
    double plane_norm2 = 0.0;
    for (Eigen::Index idx = 0; idx < psi.amplitudes.size(); ++idx) {
      const PairIndex p = pair_unindex(idx, n);
      plane_norm2 += std::norm(plane_wave_amplitude(root, p.n1, p.n2));
    }
    if (std::isfinite(plane_norm2) && plane_norm2 > 0.0) a = 1.0 / std::sqrt(plane_norm2);
  }
  return {root, std::move(psi), a};
}

inline std::vector<BetheState> bethe_states(const std::vector<BetheRoot>& roots, const ChainConfig& cfg) {
  std::vector<BetheState> states;
  states.reserve(roots.size());
  for (const auto& r : roots) states.push_back(bethe_state(r, cfg));
  return states;
}

/// Evolution through the Bethe eigenbasis:
///   |Psi(t)> = sum_k exp(-i E_k t) |k><k|n1', n2'>.
class BetheEvolver : public EigenEvolver<Complex> {
 public:
  BetheEvolver() = default;
  BetheEvolver(const std::vector<BetheState>& basis, const ChainConfig& cfg)
      : EigenEvolver<Complex>(assemble(basis, cfg)) {}

  explicit BetheEvolver(const ChainConfig& cfg) : BetheEvolver(bethe_states(enumerate_roots(cfg), cfg), cfg) {}

 private:
  static EigenEvolver<Complex> assemble(const std::vector<BetheState>& basis, const ChainConfig& cfg) {
    cfg.validate();
    const Eigen::Index dim = cfg.sector_dimension();
    if (static_cast<Eigen::Index>(basis.size()) != dim) {
      throw Error(ErrorKind::completeness, "Bethe basis has " + std::to_string(basis.size()) + " states, sector needs " +
                                               std::to_string(dim));
    }
    Eigen::MatrixXcd v(dim, dim);
    Eigen::VectorXd e(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const auto& st = basis[static_cast<std::size_t>(k)];
      if (st.amplitudes.amplitudes.size() != dim) throw Error(ErrorKind::shape, "Bethe state has wrong dimension");
      v.col(k) = st.amplitudes.amplitudes;
      e(k) = st.root.energy;
    }
    const double defect = (v.adjoint() * v - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (defect > 1e-8) {
      throw Error(ErrorKind::completeness, "Bethe basis is not orthonormal (max Gram defect " + std::to_string(defect) + ")");
    }
    return EigenEvolver<Complex>(cfg.sites, std::move(e), std::move(v));
  }
};

inline SectorState bethe_evolve(int n1, int n2, double t, const BetheEvolver& basis) {
  return basis.evolve_pair(n1, n2, t);
}

inline SectorState bethe_evolve(int n1, int n2, double t, const std::vector<BetheState>& basis, const ChainConfig& cfg) {
  return BetheEvolver(basis, cfg).evolve_pair(n1, n2, t);
}

/// Weight of the initial state |n1, n2> carried by each root class
/// (k-zero, real-pair, bound). Diagnostic only.
inline std::array<double, 3> class_weights(const std::vector<BetheState>& basis, int n1, int n2) {
  std::array<double, 3> w{0.0, 0.0, 0.0};
  for (const auto& st : basis) {
    const double p = std::norm(st.amplitudes.at(n1, n2));
    w[static_cast<std::size_t>(st.root.kind)] += p;
  }
  return w;
}

}  // namespace pcx
