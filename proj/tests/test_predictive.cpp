#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "pcx/cli.hpp"
#include "pcx/predictive.hpp"
#include "pcx/spin_hilbert.hpp"

using namespace pcx;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

BipartiteState example(const std::array<double, 6>& a) {
  BipartiteState psi{Eigen::MatrixXcd(2, 3)};
  psi.amplitudes << a[0], a[1], a[2], a[3], a[4], a[5];
  return psi;
}

EquivalencePartition pair12() {
  EquivalencePartition p;
  p.dim_b = 3;
  p.add_coordinate_subspace({0, 1});
  return p;
}

/// Random partition of H_B into coordinate classes of size >= 2 and a
/// remainder, after a random unitary change of basis.
EquivalencePartition random_partition(Eigen::Index dim_b, std::mt19937_64& rng) {
  const Eigen::MatrixXcd u = oracle::unitary_from(oracle::random_hermitian(dim_b, rng), 1.0);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim_b));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  EquivalencePartition p;
  p.dim_b = dim_b;
  std::size_t at = 0;
  std::uniform_int_distribution<int> size(2, 3);
  while (at + 2 <= order.size() && p.subspaces.size() < 2) {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(size(rng)), order.size() - at);
    Eigen::MatrixXcd basis(dim_b, static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) basis.col(static_cast<Eigen::Index>(c)) = u.col(order[at + c]);
    p.subspaces.push_back(basis);
    at += k;
  }
  return p;
}

BipartiteState random_bipartite(Eigen::Index da, Eigen::Index db, std::mt19937_64& rng) {
  return BipartiteState::unflatten(oracle::random_state(da * db, rng), da, db);
}

}  // namespace

TEST(Projector, ExampleSetup) {
  const Projector p = build_projector(pair12());
  Eigen::Matrix3cd expected;
  expected << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 1;
  EXPECT_LT((p.matrix - expected).cwiseAbs().maxCoeff(), 1e-15);
  ASSERT_EQ(p.gammas.size(), 1U);
  EXPECT_NEAR(std::abs(p.gammas[0](0) - inv_sqrt2), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p.gammas[0](1) - inv_sqrt2), 0.0, 1e-15);
  Eigen::Vector3cd kernel(inv_sqrt2, -inv_sqrt2, 0);
  EXPECT_LT((p.matrix * kernel).norm(), 1e-15);
}

TEST(Projector, EmptyPartitionIsIdentity) {
  EquivalencePartition p;
  p.dim_b = 4;
  EXPECT_LT((build_projector(p).matrix - Eigen::MatrixXcd::Identity(4, 4)).norm(), 1e-15);
}

TEST(Projector, IdempotentForRandomPartitions) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const EquivalencePartition part = random_partition(7, rng);
    const Projector p = build_projector(part);
    EXPECT_LT((p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::MatrixXcd b = p.predictive_basis();
    EXPECT_LT((b.adjoint() * b - Eigen::MatrixXcd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((p.matrix * p.remainder - p.remainder).cwiseAbs().maxCoeff(), 1e-10);
    for (std::size_t s = 0; s < part.subspaces.size(); ++s) {
      const Eigen::VectorXcd g = part.subspaces[s].rowwise().sum() / std::sqrt(double(part.subspaces[s].cols()));
      EXPECT_LT((p.gammas[s] - g).norm(), 1e-12);
    }
  }
}

TEST(Projector, InvalidPartitions) {
  EquivalencePartition single;
  single.dim_b = 3;
  single.add_coordinate_subspace({1});
  EXPECT_THROW(build_projector(single), Error);

  EquivalencePartition overlap;
  overlap.dim_b = 3;
  overlap.add_coordinate_subspace({0, 1});
  overlap.add_coordinate_subspace({1, 2});
  try {
    build_projector(overlap);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::geometry);
  }

  EquivalencePartition skew;
  skew.dim_b = 2;
  Eigen::MatrixXcd b(2, 2);
  b << 1, 1, 0, 1;
  skew.subspaces.push_back(b);
  EXPECT_THROW(build_projector(skew), Error);
}

TEST(PredictiveMap, ExampleCoefficients) {
  const Eigen::MatrixXcd c = predictive_coefficients(example({0.5, 0.5, 0, 0.5, 0, 0.5}), pair12());
  EXPECT_NEAR(std::abs(c(0, 0) - inv_sqrt2), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c(1, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c(1, 1) - 0.5), 0.0, 1e-15);
}

TEST(PredictiveMap, RemainderOnlyIsUnchanged) {
  const BipartiteState psi = example({0, 0, 0.6, 0, 0, 0.8});
  const BipartiteState out = predictive_map(psi, pair12());
  EXPECT_LT((out.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((reduced_density(out) - reduced_density(psi)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PredictiveMap, DegeneratePhase) {
  const BipartiteState psi = example({inv_sqrt2, -inv_sqrt2, 0, 0, 0, 0});
  PredictiveDiagnostics diag;
  const Eigen::MatrixXcd c = predictive_coefficients(psi, pair12(), &diag);
  EXPECT_NEAR(std::abs(c(0, 0) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_EQ(diag.degenerate_phases, 1U);
}

TEST(PredictiveMap, PhaseOfAmplitudeSum) {
  const Complex w = std::polar(1.0, 0.9);
  BipartiteState psi{Eigen::MatrixXcd::Zero(1, 3)};
  psi.amplitudes << 0.6 * w, 0.8 * w, 0;
  const Eigen::MatrixXcd c = predictive_coefficients(psi, pair12());
  EXPECT_NEAR(std::abs(c(0, 0) - w), 0.0, 1e-15);
}

TEST(PredictiveMap, ShapeMismatch) {
  BipartiteState psi{Eigen::MatrixXcd::Zero(2, 4)};
  EXPECT_THROW(predictive_map(psi, pair12()), Error);
}

TEST(ReducedDensity, ExampleEntries) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteState psi = random_bipartite(2, 3, rng);
    const Eigen::MatrixXcd& a = psi.amplitudes;
    const Eigen::MatrixXcd rho = reduced_density(psi, Side::a);
    EXPECT_NEAR(rho(0, 0).real(), std::norm(a(0, 0)) + std::norm(a(0, 1)) + std::norm(a(0, 2)), 1e-15);
    const Complex r01 = a(0, 0) * std::conj(a(1, 0)) + a(0, 1) * std::conj(a(1, 1)) + a(0, 2) * std::conj(a(1, 2));
    EXPECT_NEAR(std::abs(rho(0, 1) - r01), 0.0, 1e-15);
  }
}

TEST(ReducedDensity, ProductAndBell) {
  const BipartiteState prod = BipartiteState::product(Eigen::Vector2cd(0.6, 0.8), Eigen::Vector3cd(0, 1, 0));
  EXPECT_NEAR(von_neumann_entropy(reduced_density(prod)), 0.0, 1e-12);
  BipartiteState bell{Eigen::MatrixXcd::Zero(2, 2)};
  bell.amplitudes(0, 0) = bell.amplitudes(1, 1) = inv_sqrt2;
  EXPECT_LT((reduced_density(bell) - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_NEAR(von_neumann_entropy(reduced_density(bell)), 1.0, 1e-12);
}

TEST(PredictiveReducedDensity, ExampleValues) {
  const auto closed = oracle::example_closed_form({0.5, 0.5, 0, 0.5, 0, 0.5});
  EXPECT_NEAR(closed.rho12_predictive, 1.0 / (2.0 * std::sqrt(2.0)), 1e-15);
  const BipartiteState psi = example({0.5, 0.5, 0, 0.5, 0, 0.5});
  const Eigen::MatrixXcd rho = reduced_density(psi);
  const Eigen::MatrixXcd rho_p = predictive_reduced_density(psi, pair12());
  EXPECT_NEAR(rho(0, 1).real(), 0.25, 1e-15);
  EXPECT_NEAR(rho_p(0, 1).real(), closed.rho12_predictive, 1e-15);
  EXPECT_NEAR(von_neumann_entropy(rho), closed.entropy, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(rho_p), closed.complexity, 1e-12);
  EXPECT_NEAR(closed.entropy, 0.8113, 1e-4);
  EXPECT_NEAR(closed.complexity, 0.6009, 1e-4);
}

TEST(PredictiveReducedDensity, ClosedFormForRandomNonNegativeCoefficients) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 6> a{};
    double n2 = 0;
    for (auto& x : a) {
      x = u(rng);
      n2 += x * x;
    }
    for (auto& x : a) x /= std::sqrt(n2);
    const auto closed = oracle::example_closed_form(a);
    const Eigen::MatrixXcd rho_p = predictive_reduced_density(example(a), pair12());
    EXPECT_NEAR(rho_p(0, 1).real(), closed.rho12_predictive, 1e-14);
    EXPECT_NEAR(von_neumann_entropy(rho_p), closed.complexity, 1e-10);
  }
}

TEST(PredictiveReducedDensity, NoEquivalencesGivesOrdinaryDensity) {
  std::mt19937_64 rng(9);
  EquivalencePartition none;
  none.dim_b = 5;
  const BipartiteState psi = random_bipartite(3, 5, rng);
  EXPECT_LT((predictive_reduced_density(psi, none) - reduced_density(psi)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PredictiveReducedDensity, ZeroWeightOnEquivalentPair) {
  const BipartiteState psi = example({0, 0, 0.6, 0, 0, 0.8});
  EXPECT_LT((predictive_reduced_density(psi, pair12()) - reduced_density(psi)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(von_neumann_entropy(Eigen::Matrix2cd(Eigen::Vector2cd(1, 0).asDiagonal())), 0.0, 0.0);
  EXPECT_NEAR(von_neumann_entropy(Eigen::Matrix2cd(Eigen::Vector2cd(0.5, 0.5).asDiagonal())), 1.0, 1e-15);
  Eigen::Matrix2cd m;
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  m << 0.5, c, c, 0.5;
  EXPECT_NEAR(von_neumann_entropy(m), oracle::binary_entropy_bits(0.5 + c), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(m), 0.6009, 1e-4);
  EXPECT_NEAR(von_neumann_entropy(Eigen::Matrix2cd(Eigen::Vector2cd(0.5, 0.5).asDiagonal()), LogBase::nats), std::log(2.0),
              1e-15);
}

TEST(Entropy, RejectsBrokenDensity) {
  EXPECT_THROW(von_neumann_entropy(Eigen::Matrix2cd(Eigen::Vector2cd(0.5, 0.4).asDiagonal())), Error);
  EXPECT_THROW(von_neumann_entropy(Eigen::Matrix2cd(Eigen::Vector2cd(1.1, -0.1).asDiagonal())), Error);
  EXPECT_THROW(von_neumann_entropy(Eigen::MatrixXcd::Identity(2, 3)), Error);
}

// ---------------------------------------------------------------------------
// Properties on random states

TEST(Properties, EntropyOfBothSidesAgrees) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const BipartiteState psi = random_bipartite(2 + trial % 3, 3 + trial % 4, rng);
    EXPECT_NEAR(von_neumann_entropy(reduced_density(psi, Side::a)), von_neumann_entropy(reduced_density(psi, Side::b)), 1e-10);
  }
}

TEST(Properties, FastDensityEqualsMapThenTrace) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const BipartiteState psi = random_bipartite(3, 7, rng);
    const EquivalencePartition part = random_partition(7, rng);
    const Eigen::MatrixXcd direct = predictive_reduced_density(psi, part);
    const Eigen::MatrixXcd via_map = reduced_density(predictive_map(psi, part));
    EXPECT_LT((direct - via_map).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Properties, MarginalsPreserved) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const BipartiteState psi = random_bipartite(3, 7, rng);
    const BipartiteState out = predictive_map(psi, random_partition(7, rng));
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(out.amplitudes.row(i).squaredNorm(), psi.amplitudes.row(i).squaredNorm(), 1e-12);
    EXPECT_NEAR(out.amplitudes.squaredNorm(), 1.0, 1e-12);
  }
}

TEST(Properties, EntropyUnchangedByLocalPhases) {
  // Rephasing an A row conjugates rho'_A by a diagonal unitary.
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> ang(0.0, 6.28);
  for (int trial = 0; trial < 20; ++trial) {
    BipartiteState psi = random_bipartite(3, 6, rng);
    const EquivalencePartition part = random_partition(6, rng);
    const double c0 = von_neumann_entropy(predictive_reduced_density(psi, part));
    for (Eigen::Index i = 0; i < 3; ++i) psi.amplitudes.row(i) *= std::polar(1.0, ang(rng));
    EXPECT_NEAR(von_neumann_entropy(predictive_reduced_density(psi, part)), c0, 1e-12);
  }
}

// C <= S is conjectured for physical horizon classes, not for arbitrary
// partitions. Random partitions are expected to break it occasionally; the
// count is reported, and an explicit counterexample pins the finding.
TEST(Properties, ComplexityBoundOnRandomPartitions) {
  std::mt19937_64 rng(35);
  int violations = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const BipartiteState psi = random_bipartite(2, 6, rng);
    const EquivalencePartition part = random_partition(6, rng);
    const double s = von_neumann_entropy(reduced_density(psi));
    const double c = von_neumann_entropy(predictive_reduced_density(psi, part));
    EXPECT_GE(c, -1e-12);
    EXPECT_LE(c, 1.0 + 1e-12);
    if (c > s + 1e-9) ++violations;
  }
  RecordProperty("random_partition_violations", violations);
  std::cout << "[ finding  ] C > S on " << violations << " of " << trials << " random states with random partitions\n";
}

TEST(Properties, ComplexityCanExceedEntropyForArbitraryPartition) {
  // One class whose sums flip the sign of its overlap, plus a remainder
  // coordinate whose overlap is then cancelled.
  BipartiteState psi{Eigen::MatrixXcd(2, 3)};
  psi.amplitudes << 1.0, -0.9, 1.8, -0.9, 1.0, -1.8;
  psi.amplitudes /= psi.amplitudes.norm();
  EquivalencePartition part;
  part.dim_b = 3;
  part.add_coordinate_subspace({0, 1});
  const double s = von_neumann_entropy(reduced_density(psi));
  const double c = von_neumann_entropy(predictive_reduced_density(psi, part));
  EXPECT_GT(c, s + 0.1);
}

TEST(Properties, LinearityUnderExactEquivalence) {
  // Dynamics U = sum_b U_A^(class(b)) (x) |b><b|: basis states of H_B in the
  // same class are exactly equivalent.
  std::mt19937_64 rng(36);
  const Eigen::Index da = 2, db = 5;
  const std::vector<int> cls{0, 0, 1, 1, 2};
  std::vector<Eigen::MatrixXcd> ham;
  for (int c = 0; c < 3; ++c) ham.push_back(oracle::random_hermitian(da, rng));
  const BipartiteDynamics dyn = [&](const Eigen::VectorXcd& v, double t) {
    BipartiteState s = BipartiteState::unflatten(v, da, db);
    for (Eigen::Index b = 0; b < db; ++b)
      s.amplitudes.col(b) = oracle::unitary_from(ham[static_cast<std::size_t>(cls[b])], t) * s.amplitudes.col(b);
    return s.flatten();
  };
  const Eigen::VectorXcd psi = oracle::random_state(da, rng);
  Eigen::VectorXcd phi1 = Eigen::VectorXcd::Zero(db), phi2 = Eigen::VectorXcd::Zero(db);
  phi1(0) = 1.0;
  phi2(1) = 1.0;
  const Complex a1(0.6, 0.0), a2(0.0, 0.8);
  for (double t : {0.0, 0.7, 3.1}) {
    EXPECT_LT(equivalence_residual(phi1, phi2, psi, t, dyn), 1e-12);
    const auto evolved = [&](const Eigen::VectorXcd& phi) {
      return reduced_density(BipartiteState::unflatten(dyn(BipartiteState::product(psi, phi).flatten(), t), da, db));
    };
    const Eigen::MatrixXcd lhs = evolved(a1 * phi1 + a2 * phi2);
    const Eigen::MatrixXcd rhs = std::norm(a1) * evolved(phi1) + std::norm(a2) * evolved(phi2);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
  Eigen::VectorXcd phi3 = Eigen::VectorXcd::Zero(db);
  phi3(2) = 1.0;
  EXPECT_GT(equivalence_residual(phi1, phi3, psi, 3.1, dyn), 1e-6);
}

TEST(EquivalenceResidual, TrivialCases) {
  std::mt19937_64 rng(37);
  const Eigen::MatrixXcd h = oracle::random_hermitian(8, rng);
  const BipartiteDynamics dyn = [&](const Eigen::VectorXcd& v, double t) -> Eigen::VectorXcd {
    return oracle::unitary_from(h, t) * v;
  };
  const Eigen::VectorXcd psi = oracle::random_state(2, rng);
  const Eigen::VectorXcd phi1 = oracle::random_state(4, rng);
  const Eigen::VectorXcd phi2 = oracle::random_state(4, rng);
  EXPECT_NEAR(equivalence_residual(phi1, phi1, psi, 2.0, dyn), 0.0, 1e-12);
  EXPECT_NEAR(equivalence_residual(phi1, phi2, psi, 0.0, dyn), 0.0, 1e-12);
  EXPECT_THROW(equivalence_residual(phi1, Eigen::VectorXcd::Zero(3), psi, 0.0, dyn), Error);
}

TEST(EquivalenceResidual, GrowsFromZeroForDistantDifferencesOnChain) {
  // N = 8, A = site 1; exterior states differ only at sites 4 and 5
  // (circular distance >= 3 from site 1).
  const ChainConfig cfg{8, 1.0};
  const int site = 1;
  const BipartiteDynamics dyn = site_bipartite_dynamics(cfg, site);
  const Eigen::Index db = Eigen::Index{1} << 7;
  // Exterior bit k <-> site k + 2.
  Eigen::VectorXcd phi1 = Eigen::VectorXcd::Zero(db), phi2 = Eigen::VectorXcd::Zero(db);
  phi1(Eigen::Index{1} << 2) = 1.0;  // site 4 flipped
  phi2(Eigen::Index{1} << 3) = 1.0;  // site 5 flipped
  const Eigen::VectorXcd psi = Eigen::Vector2cd(inv_sqrt2, inv_sqrt2);
  std::vector<double> r;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) r.push_back(equivalence_residual(phi1, phi2, psi, t, dyn));
  EXPECT_NEAR(r.front(), 0.0, 1e-14);
  EXPECT_GT(r.back(), r[1]);
  EXPECT_GT(r[1], 0.0);
}

TEST(WorkedExample, GenericPipelineReproducesClosedForm) {
  const ExampleReport rep = evaluate_example(builtin_example_coefficients());
  EXPECT_NEAR(rep.rho(0, 1).real(), 0.25, 1e-15);
  EXPECT_NEAR(rep.rho_predictive(0, 1).real(), 1.0 / (2.0 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(rep.entropy, 0.8112781244591328, 1e-12);
  EXPECT_NEAR(rep.complexity, oracle::binary_entropy_bits(0.5 + 1.0 / (2.0 * std::sqrt(2.0))), 1e-12);
  EXPECT_LT(rep.complexity, rep.entropy);
  EXPECT_EQ(rep.degenerate_phases, 0U);
}
