#pragma once

// Predictive states for a finite bipartite system H_A (x) H_B.
//
// Exterior states that yield the same reduced dynamics of A are grouped into
// linear equivalence subspaces of H_B. Each subspace with orthonormal basis
// {phi_1..phi_n} collapses onto gamma = (phi_1 + ... + phi_n)/sqrt(n); for a
// fixed A-basis index the coefficients (a_1..a_n) on that subspace become the
// single coefficient
//   sqrt(sum |a_l|^2) * (sum a_l) / |sum a_l|
// on gamma, which keeps the probability of the class. Everything orthogonal
// to the subspaces is kept as is. The predictive complexity is the von
// Neumann entropy of the reduced density matrix of the resulting state.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcx/error.hpp"
#include "pcx/spin_hilbert.hpp"

namespace pcx {

/// Pure state sum_ij a_ij |psi_i>|phi_j>, rows over H_A, columns over H_B.
struct BipartiteState {
  Eigen::MatrixXcd amplitudes;

  Eigen::Index dim_a() const { return amplitudes.rows(); }
  Eigen::Index dim_b() const { return amplitudes.cols(); }

  /// Product-basis vector with index i * dim_b + j.
  Eigen::VectorXcd flatten() const {
    Eigen::VectorXcd v(amplitudes.size());
    for (Eigen::Index i = 0; i < dim_a(); ++i)
      for (Eigen::Index j = 0; j < dim_b(); ++j) v(i * dim_b() + j) = amplitudes(i, j);
    return v;
  }

  static BipartiteState unflatten(const Eigen::VectorXcd& v, Eigen::Index dim_a, Eigen::Index dim_b) {
    if (v.size() != dim_a * dim_b) throw Error(ErrorKind::shape, "vector does not match dim_a * dim_b");
    BipartiteState s{Eigen::MatrixXcd(dim_a, dim_b)};
    for (Eigen::Index i = 0; i < dim_a; ++i)
      for (Eigen::Index j = 0; j < dim_b; ++j) s.amplitudes(i, j) = v(i * dim_b + j);
    return s;
  }

  static BipartiteState product(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return {a * b.transpose()};
  }
};

/// Mutually orthogonal equivalence subspaces of H_B, each given by
/// orthonormal basis columns. The orthogonal complement is the remainder.
struct EquivalencePartition {
  Eigen::Index dim_b = 0;
  std::vector<Eigen::MatrixXcd> subspaces;

  /// Subspace spanned by the listed standard basis vectors of H_B.
  void add_coordinate_subspace(const std::vector<Eigen::Index>& indices) {
    Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(dim_b, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) basis(indices[k], static_cast<Eigen::Index>(k)) = 1.0;
    subspaces.push_back(std::move(basis));
  }
};

struct Projector {
  Eigen::MatrixXcd matrix;
  std::vector<Eigen::VectorXcd> gammas;
  /// Orthonormal basis of the remainder, columns.
  Eigen::MatrixXcd remainder;

  /// Orthonormal basis of H'_B: the gamma vectors followed by the remainder.
  Eigen::MatrixXcd predictive_basis() const {
    Eigen::MatrixXcd b(matrix.rows(), static_cast<Eigen::Index>(gammas.size()) + remainder.cols());
    for (std::size_t s = 0; s < gammas.size(); ++s) b.col(static_cast<Eigen::Index>(s)) = gammas[s];
    b.rightCols(remainder.cols()) = remainder;
    return b;
  }
};

struct PredictiveDiagnostics {
  /// Classes whose amplitudes summed to (numerically) zero; their phase was
  /// set to 1.
  std::size_t degenerate_phases = 0;
};

inline constexpr double degenerate_phase_tolerance = 1e-12;

namespace predictive_detail {

inline Eigen::MatrixXcd stacked(const EquivalencePartition& part) {
  Eigen::Index cols = 0;
  for (const auto& s : part.subspaces) cols += s.cols();
  Eigen::MatrixXcd all(part.dim_b, cols);
  Eigen::Index at = 0;
  for (const auto& s : part.subspaces) {
    all.middleCols(at, s.cols()) = s;
    at += s.cols();
  }
  return all;
}

/// Orthonormal basis of the complement of span(used). Gram-Schmidt over the
/// standard basis, always taking the vector with the largest residual, so a
/// complement spanned by coordinate vectors is returned exactly.
inline Eigen::MatrixXcd complement_basis(const Eigen::MatrixXcd& used, Eigen::Index dim) {
  Eigen::MatrixXcd residual = Eigen::MatrixXcd::Identity(dim, dim) - used * used.adjoint();
  const Eigen::Index want = dim - used.cols();
  Eigen::MatrixXcd basis(dim, want);
  for (Eigen::Index k = 0; k < want; ++k) {
    Eigen::Index best = 0;
    const double norm = residual.colwise().norm().maxCoeff(&best);
    if (norm < 1e-8) throw Error(ErrorKind::geometry, "could not complete the remainder basis");
    const Eigen::VectorXcd u = residual.col(best) / norm;
    basis.col(k) = u;
    residual -= u * (u.adjoint() * residual);
  }
  return basis;
}

inline Complex unit_phase(Complex sum, double weight, PredictiveDiagnostics* diag) {
  const double mag = std::abs(sum);
  if (mag <= degenerate_phase_tolerance * std::sqrt(weight)) {
    if (diag != nullptr && weight > 0.0) ++diag->degenerate_phases;
    return {1.0, 0.0};
  }
  return sum / mag;
}

}  // namespace predictive_detail

inline void validate(const EquivalencePartition& part) {
  Eigen::Index total = 0;
  for (const auto& s : part.subspaces) {
    if (s.rows() != part.dim_b) throw Error(ErrorKind::geometry, "subspace basis has wrong ambient dimension");
    if (s.cols() < 2) throw Error(ErrorKind::geometry, "equivalence subspace needs at least two basis vectors");
    total += s.cols();
  }
  if (total > part.dim_b) throw Error(ErrorKind::geometry, "subspaces exceed dim H_B");
  if (total == 0) return;
  const Eigen::MatrixXcd all = predictive_detail::stacked(part);
  const double defect = (all.adjoint() * all - Eigen::MatrixXcd::Identity(total, total)).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw Error(ErrorKind::geometry, "subspace vectors are not orthonormal (defect " + std::to_string(defect) + ")");
  }
}

/// P = Id on the remainder + sum_s |gamma_s><gamma_s|.
inline Projector build_projector(const EquivalencePartition& part) {
  validate(part);
  Projector p;
  const Eigen::MatrixXcd all = predictive_detail::stacked(part);
  p.remainder = predictive_detail::complement_basis(all, part.dim_b);
  p.matrix = p.remainder * p.remainder.adjoint();
  for (const auto& s : part.subspaces) {
    Eigen::VectorXcd g = s.rowwise().sum() / std::sqrt(static_cast<double>(s.cols()));
    p.matrix += g * g.adjoint();
    p.gammas.push_back(std::move(g));
  }
  return p;
}

/// Coefficients of the predictive state on predictive_basis() of `proj`,
/// one row per H_A basis index.
inline Eigen::MatrixXcd predictive_coefficients(const BipartiteState& psi, const EquivalencePartition& part,
                                                const Projector& proj, PredictiveDiagnostics* diag = nullptr) {
  if (psi.dim_b() != part.dim_b) throw Error(ErrorKind::shape, "state and partition disagree on dim H_B");
  const Eigen::Index n_sub = static_cast<Eigen::Index>(part.subspaces.size());
  Eigen::MatrixXcd coeff(psi.dim_a(), n_sub + proj.remainder.cols());
  for (Eigen::Index i = 0; i < psi.dim_a(); ++i) {
    const Eigen::VectorXcd row = psi.amplitudes.row(i).transpose();
    for (Eigen::Index s = 0; s < n_sub; ++s) {
      const Eigen::VectorXcd a = part.subspaces[static_cast<std::size_t>(s)].adjoint() * row;
      const double weight = a.squaredNorm();
      coeff(i, s) = std::sqrt(weight) * predictive_detail::unit_phase(a.sum(), weight, diag);
    }
    coeff.row(i).tail(proj.remainder.cols()) = (proj.remainder.adjoint() * row).transpose();
  }
  return coeff;
}

inline Eigen::MatrixXcd predictive_coefficients(const BipartiteState& psi, const EquivalencePartition& part,
                                                PredictiveDiagnostics* diag = nullptr) {
  return predictive_coefficients(psi, part, build_projector(part), diag);
}

/// The normalized predictive state |Psi'>, expressed in the original H_B
/// coordinates (H'_B embedded as span of gammas and remainder).
inline BipartiteState predictive_map(const BipartiteState& psi, const EquivalencePartition& part,
                                     PredictiveDiagnostics* diag = nullptr) {
  const Projector proj = build_projector(part);
  const Eigen::MatrixXcd coeff = predictive_coefficients(psi, part, proj, diag);
  return {coeff * proj.predictive_basis().transpose()};
}

enum class Side { a, b };

inline Eigen::MatrixXcd reduced_density(const BipartiteState& psi, Side side = Side::a) {
  if (side == Side::a) return psi.amplitudes * psi.amplitudes.adjoint();
  return psi.amplitudes.transpose() * psi.amplitudes.conjugate();
}

/// rho'_A computed from the predictive coefficients without forming |Psi'>.
inline Eigen::MatrixXcd predictive_reduced_density(const BipartiteState& psi, const EquivalencePartition& part,
                                                   PredictiveDiagnostics* diag = nullptr) {
  const Eigen::MatrixXcd coeff = predictive_coefficients(psi, part, diag);
  return coeff * coeff.adjoint();
}

enum class LogBase { bits, nats };

inline double entropy_term(double p, LogBase base) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return base == LogBase::bits ? -p * std::log2(p) : -p * std::log(p);
}

inline constexpr double eigenvalue_clip = 1e-12;
inline constexpr double trace_tolerance = 1e-9;

/// -tr(rho log rho), in bits by default.
inline double von_neumann_entropy(const Eigen::MatrixXcd& rho, LogBase base = LogBase::bits) {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::shape, "density matrix is not square");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > trace_tolerance) {
    throw Error(ErrorKind::normalization, "density matrix has trace " + std::to_string(tr));
  }
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double lambda = solver.eigenvalues()(k);
    if (lambda < -eigenvalue_clip) {
      throw Error(ErrorKind::normalization, "density matrix has eigenvalue " + std::to_string(lambda));
    }
    s += entropy_term(lambda, base);
  }
  return s;
}

/// Trace distance (1/2)||rho1 - rho2||_1 between density matrices.
inline double trace_distance(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols()) throw Error(ErrorKind::shape, "density matrices differ in size");
  const Eigen::MatrixXcd d = rho1 - rho2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

/// Evolution of a product-basis vector of H_A (x) H_B (index i * dim_b + j).
using BipartiteDynamics = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&, double)>;

/// Trace distance between tr_B of the evolved |psi>|phi1> and |psi>|phi2>.
/// Zero means phi1 and phi2 are predictively equivalent at time t for psi.
inline double equivalence_residual(const Eigen::VectorXcd& phi1, const Eigen::VectorXcd& phi2, const Eigen::VectorXcd& psi,
                                   double t, const BipartiteDynamics& dynamics) {
  if (phi1.size() != phi2.size()) throw Error(ErrorKind::shape, "exterior states differ in dimension");
  const auto reduced_at_t = [&](const Eigen::VectorXcd& phi) {
    const Eigen::VectorXcd v = dynamics(BipartiteState::product(psi, phi).flatten(), t);
    return reduced_density(BipartiteState::unflatten(v, psi.size(), phi.size()), Side::a);
  };
  return trace_distance(reduced_at_t(phi1), reduced_at_t(phi2));
}

}  // namespace pcx
