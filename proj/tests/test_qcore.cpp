#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "entrate/qcore.hpp"

namespace {

using namespace entrate;
using namespace entrate::qcore;

ComplexVector rebuild(const SchmidtState& s) {
  ComplexVector v = ComplexVector::Zero(s.d_a() * s.d_b());
  for (Index i = 0; i < s.d(); ++i)
    v += s.coefficients()(i) * Eigen::kroneckerProduct(s.basis_a().col(i), s.basis_b().col(i)).eval();
  return v;
}

// Distance between two unit vectors modulo a global phase.
double phase_distance(const ComplexVector& a, const ComplexVector& b) {
  const Complex overlap = a.dot(b);
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a * phase - b).cwiseAbs().maxCoeff();
}

TEST(PureState, RejectsUnnormalizedAmplitudes) {
  ComplexVector v(4);
  v << 1.0, 0.0, 0.0, 1.0;
  EXPECT_THROW(PureState(2, 2, v), ValidationError);
  EXPECT_NO_THROW(PureState::normalized(2, 2, v));
}

TEST(PureState, RejectsWrongAmplitudeCount) {
  EXPECT_THROW(PureState(2, 3, ComplexVector::Unit(4, 0)), DimensionError);
}

TEST(PureState, MatrixRoundTrip) {
  const PureState psi = random_state(3, 2, 7);
  const PureState back = PureState::from_matrix(psi.as_matrix());
  EXPECT_EQ(back.d_a(), 3);
  EXPECT_EQ(back.d_b(), 2);
  EXPECT_EQ((back.amplitudes() - psi.amplitudes()).norm(), 0.0);
}

TEST(SchmidtDecompose, ProductState) {
  const PureState psi(2, 2, ComplexVector::Unit(4, 0));
  const SchmidtState s = schmidt_decompose(psi);
  EXPECT_NEAR(s.coefficients()(0), 1.0, 1e-15);
  EXPECT_NEAR(s.coefficients()(1), 0.0, 1e-15);
  EXPECT_EQ(s.schmidt_rank(), 1);
}

TEST(SchmidtDecompose, MaximallyEntangled) {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  const SchmidtState s = schmidt_decompose(PureState(2, 2, v));
  EXPECT_NEAR(s.coefficients()(0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.coefficients()(1), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SchmidtDecompose, RandomStatesReconstruct) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto rng = make_engine(seed);
    const Index da = 1 + static_cast<Index>(seed % 4);
    const Index db = 1 + static_cast<Index>((seed / 4) % 5);
    const PureState psi = random_state(da, db, rng);
    const SchmidtState s = schmidt_decompose(psi);
    EXPECT_LT(phase_distance(rebuild(s), psi.amplitudes()), 1e-10) << da << "x" << db;
    EXPECT_LT(unitarity_defect(s.basis_a()), 1e-10);
    EXPECT_LT(unitarity_defect(s.basis_b()), 1e-10);
    for (Index i = 1; i < s.d(); ++i) EXPECT_GE(s.coefficients()(i - 1), s.coefficients()(i));
  }
}

TEST(SchmidtDecompose, ThreeByFourExample) {
  const PureState psi = random_state(3, 4, 2024);
  const SchmidtState s = schmidt_decompose(psi);
  EXPECT_EQ(s.d(), 3);
  EXPECT_LT((rebuild(s) - psi.amplitudes()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SchmidtState, InvariantsAreEnforced) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  RealVector increasing(2);
  increasing << std::sqrt(0.1), std::sqrt(0.9);
  EXPECT_THROW(SchmidtState(increasing, id, id), ValidationError);
  RealVector negative(2);
  negative << 1.0, -0.0001;
  EXPECT_THROW(SchmidtState(negative, id, id), ValidationError);
  RealVector unnormalized(2);
  unnormalized << 0.9, 0.1;
  EXPECT_THROW(SchmidtState(unnormalized, id, id), ValidationError);
  ComplexMatrix bad = id;
  bad(0, 1) = 0.5;
  RealVector ok(2);
  ok << std::sqrt(0.9), std::sqrt(0.1);
  EXPECT_THROW(SchmidtState(ok, bad, id), ValidationError);
  EXPECT_NO_THROW(SchmidtState(ok, id, id));
}

TEST(SchmidtState, FromCoefficientsSortsStably) {
  RealVector c(3);
  c << 0.5, std::sqrt(0.5), 0.5;
  const SchmidtState s = SchmidtState::from_coefficients(c, 3, 3);
  EXPECT_DOUBLE_EQ(s.coefficients()(0), std::sqrt(0.5));
  // The basis columns keep the original labels in stable order.
  EXPECT_EQ(s.basis_a()(1, 0), Complex(1.0));
  EXPECT_EQ(s.basis_a()(0, 1), Complex(1.0));
  EXPECT_EQ(s.basis_a()(2, 2), Complex(1.0));
  EXPECT_LT((s.to_pure_state().amplitudes() - rebuild(s)).norm(), 1e-15);
}

TEST(PartialTrace, ProductState) {
  const ComplexVector v = ComplexVector::Unit(4, 0);
  const ComplexMatrix rho_a = partial_trace_b(v * v.adjoint(), 2, 2);
  EXPECT_NEAR(std::abs(rho_a(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(rho_a.cwiseAbs().sum(), 1.0, 1e-15);
}

TEST(PartialTrace, MaximallyEntangledGivesMaximallyMixed) {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  const ComplexMatrix rho_a = partial_trace_b(v * v.adjoint(), 2, 2);
  EXPECT_LT((rho_a - 0.5 * ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PartialTrace, SchmidtStateGivesSquaredCoefficients) {
  RealVector c(2);
  c << std::sqrt(0.9), std::sqrt(0.1);
  const PureState psi = SchmidtState::from_coefficients(c, 2, 2).to_pure_state();
  const ComplexMatrix rho_a = partial_trace_b(psi.density(), 2, 2);
  EXPECT_NEAR(rho_a(0, 0).real(), 0.9, 1e-14);
  EXPECT_NEAR(rho_a(1, 1).real(), 0.1, 1e-14);
  EXPECT_NEAR(std::abs(rho_a(0, 1)), 0.0, 1e-15);
}

TEST(PartialTrace, PreservesTraceAndHermiticity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PureState psi = random_state(3, 4, seed);
    const ComplexMatrix rho_a = partial_trace_b(psi.density(), 3, 4);
    EXPECT_NEAR(rho_a.trace().real(), psi.density().trace().real(), 1e-12);
    EXPECT_LT(hermiticity_defect(rho_a), 1e-14);
  }
}

TEST(PartialTrace, IsLinear) {
  const PureState p = random_state(2, 3, 1);
  const PureState q = random_state(2, 3, 2);
  const ComplexMatrix mix = 0.3 * p.density() + 0.7 * q.density();
  const ComplexMatrix lhs = partial_trace_b(mix, 2, 3);
  const ComplexMatrix rhs = 0.3 * partial_trace_b(p.density(), 2, 3) + 0.7 * partial_trace_b(q.density(), 2, 3);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PartialTrace, DimensionMismatch) {
  EXPECT_THROW(partial_trace_b(ComplexMatrix::Identity(5, 5), 2, 2), DimensionError);
}

TEST(Entropy, PureIsZero) {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  EXPECT_NEAR(von_neumann_entropy(rho), 0.0, 1e-15);
}

TEST(Entropy, MaximallyMixedQubit) {
  const ComplexMatrix rho = 0.5 * ComplexMatrix::Identity(2, 2);
  EXPECT_NEAR(von_neumann_entropy(rho), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(von_neumann_entropy(rho, LogBase::bits), 1.0, 1e-15);
}

TEST(Entropy, NinetyTenDistribution) {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 0.9;
  rho(1, 1) = 0.1;
  // -0.9 ln 0.9 - 0.1 ln 0.1
  EXPECT_NEAR(von_neumann_entropy(rho), 0.325082973391448, 1e-14);
}

TEST(Entropy, UnitaryInvariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PureState psi = random_state(3, 3, seed);
    const ComplexMatrix rho = partial_trace_b(psi.density(), 3, 3);
    const ComplexMatrix u = random_unitary(3, seed + 100);
    EXPECT_NEAR(von_neumann_entropy(u * rho * u.adjoint()), von_neumann_entropy(rho), 1e-10);
  }
}

TEST(Entropy, TinyNegativeEigenvaluesClampToZero) {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.0 + 1e-11;
  rho(1, 1) = -1e-11;
  EXPECT_NEAR(von_neumann_entropy(rho), 0.0, 1e-10);
}

TEST(Entropy, Rejections) {
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  EXPECT_THROW(von_neumann_entropy(neg), ValidationError);
  EXPECT_THROW(von_neumann_entropy(0.3 * ComplexMatrix::Identity(2, 2)), ValidationError);
  ComplexMatrix nonherm = 0.5 * ComplexMatrix::Identity(2, 2);
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(von_neumann_entropy(nonherm), ValidationError);
}

TEST(HermExpm, ZeroHamiltonianIsIdentity) {
  const ComplexMatrix u = herm_expm(ComplexMatrix::Zero(3, 3), 1.7);
  EXPECT_LT((u - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HermExpm, PauliZAtPi) {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  const ComplexMatrix u = herm_expm(h, std::numbers::pi);
  EXPECT_LT((u + ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HermExpm, UnitaryAndGroupProperty) {
  const ComplexMatrix h = random_hermitian(4, 11);
  const ComplexMatrix u = herm_expm(h, 0.3);
  EXPECT_LT(unitarity_defect(u), 1e-10);
  EXPECT_LT((u * herm_expm(h, -0.3) - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((herm_expm(h, 0.1) * herm_expm(h, 0.2) - u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HermExpm, RejectsNonHermitian) {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 1) = 1.0;
  EXPECT_THROW(herm_expm(h, 1.0), ValidationError);
}

TEST(Random, DeterministicPerSeed) {
  EXPECT_EQ((random_state(2, 3, 5).amplitudes() - random_state(2, 3, 5).amplitudes()).norm(), 0.0);
  EXPECT_EQ((random_hermitian(4, 5) - random_hermitian(4, 5)).norm(), 0.0);
  EXPECT_GT((random_state(2, 3, 5).amplitudes() - random_state(2, 3, 6).amplitudes()).norm(), 0.0);
}

TEST(Random, StateIsNormalized) {
  EXPECT_NEAR(random_state(2, 3, 9).amplitudes().norm(), 1.0, 1e-12);
}

TEST(Random, HermitianDefectIsTiny) {
  EXPECT_LT(hermiticity_defect(random_hermitian(4, 3)), 1e-14);
}

TEST(Random, UnitaryIsUnitary) {
  EXPECT_LT(unitarity_defect(random_unitary(5, 3)), 1e-12);
}

TEST(Random, StreamsAreIndependentOfOrder) {
  auto a = make_engine(1, 4);
  auto b = make_engine(1, 3);
  auto c = make_engine(1, 4);
  EXPECT_EQ(a(), c());
  EXPECT_NE(make_engine(1, 4)(), b());
}

TEST(LogBase, Conversion) {
  EXPECT_NEAR(to_base(std::numbers::ln2, LogBase::bits), 1.0, 1e-15);
  EXPECT_EQ(to_base(0.7, LogBase::nat), 0.7);
}

}  // namespace
