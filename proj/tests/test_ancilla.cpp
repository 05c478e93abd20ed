#include <cmath>

#include <gtest/gtest.h>

#include "entrate/ancilla.hpp"
#include "entrate/optimum.hpp"

namespace {

using namespace entrate;
using namespace entrate::ancilla;

constexpr double kWorkedRate = 1.31833474640173;
const oracle::FDConfig kFd{1e-5, oracle::FdScheme::richardson, LogBase::nat};

AncillaCoeffs worked_coeffs() {
  RealMatrix c(1, 2);
  c << std::sqrt(0.9), std::sqrt(0.1);
  return AncillaCoeffs(c);
}

AncillaCoeffs random_coeffs(std::uint64_t seed, Index rows, Index cols) {
  auto rng = qcore::make_engine(seed, 5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  RealMatrix c(rows, cols);
  for (Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return AncillaCoeffs::normalized(c);
}

GBlock random_g(std::uint64_t seed, Index d) {
  auto rng = qcore::make_engine(seed, 6);
  std::normal_distribution<double> n01(0.0, 1.0);
  RealVector u(d * (d - 1) / 2);
  for (Index i = 0; i < u.size(); ++i) u(i) = n01(rng);
  return GBlock(d, u);
}

GBlock unit_constraint(const AncillaCoeffs& c, const GBlock& g) {
  return GBlock(g.d(), g.upper() / std::sqrt(variance_constraint(c, g)));
}

TEST(AncillaCoeffs, Invariants) {
  RealMatrix bad(1, 2);
  bad << 0.6, 0.6;
  EXPECT_THROW(AncillaCoeffs{bad}, ValidationError);
  bad << -0.6, 0.8;
  EXPECT_THROW(AncillaCoeffs{bad}, ValidationError);
  const AncillaCoeffs c = worked_coeffs();
  EXPECT_NEAR(c.k()(0, 0), std::sqrt(0.9) * std::log(std::sqrt(0.9)), 1e-15);
  RealMatrix z(2, 2);
  z << 1.0, 0.0, 0.0, 0.0;
  const AncillaCoeffs with_zero(z);
  EXPECT_EQ(with_zero.k()(0, 1), 0.0);
  const AncillaCoeffs n = AncillaCoeffs::normalized(RealMatrix::Constant(2, 3, 5.0), 0.0);
  EXPECT_NEAR(n.c().norm(), 1.0, 1e-15);
  EXPECT_THROW(AncillaCoeffs::normalized(RealMatrix::Zero(2, 2)), ValidationError);
}

TEST(GBlock, AntisymmetryByConstruction) {
  const GBlock g = random_g(1, 4);
  const RealMatrix m = g.matrix();
  EXPECT_EQ((m + m.transpose()).norm(), 0.0);
  EXPECT_EQ((GBlock::from_matrix(m).upper() - g.upper()).norm(), 0.0);
  RealMatrix notanti = m;
  notanti(0, 1) += 1.0;
  EXPECT_THROW(GBlock::from_matrix(notanti), ValidationError);
  EXPECT_THROW(GBlock(3, RealVector::Zero(2)), DimensionError);
}

TEST(StructuredHamiltonian, NoAncillaIsUnchanged) {
  const ComplexMatrix h = qcore::random_hermitian(6, 2);
  EXPECT_EQ((build_structured_hamiltonian(h, 1, 1) - h).norm(), 0.0);
}

TEST(StructuredHamiltonian, TraceAndSpectrum) {
  const ComplexMatrix h = qcore::random_hermitian(4, 3);
  const ComplexMatrix big = build_structured_hamiltonian(h, 2, 3);
  EXPECT_NEAR(std::abs(big.trace() - 6.0 * h.trace()), 0.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> small_es(h, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> big_es(big, Eigen::EigenvaluesOnly);
  for (Index i = 0; i < big.rows(); ++i) {
    EXPECT_NEAR(big_es.eigenvalues()(i), small_es.eigenvalues()(i / 6), 1e-12);
  }
  EXPECT_TRUE(is_structured(big, 2, 2, 2, 3));
}

TEST(StructuredHamiltonian, ValidatorRejectsAncillaCoupling) {
  const ComplexMatrix h = qcore::random_hermitian(4, 3);
  ComplexMatrix big = build_structured_hamiltonian(h, 2, 2);
  EXPECT_TRUE(is_structured(big, 2, 2, 2, 2));
  big(0, 1) += 0.5;  // couples B' labels 0 and 1
  big(1, 0) += 0.5;
  EXPECT_FALSE(is_structured(big, 2, 2, 2, 2));
  EXPECT_FALSE(is_structured(qcore::random_hermitian(16, 1), 2, 2, 2, 2));
  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW(build_structured_hamiltonian(bad, 2, 2), ValidationError);
}

TEST(Objective, Examples) {
  const AncillaCoeffs c = worked_coeffs();
  EXPECT_EQ(ancilla_objective(c, GBlock::zero(2)), 0.0);
  // d_A' = 1, G = [[0, g], [-g, 0]] with ||CG||_F = 1 forces |g| = 1.
  RealVector u(1);
  u << -1.0;
  const GBlock g(2, u);
  EXPECT_NEAR(variance_constraint(c, g), 1.0, 1e-15);
  EXPECT_NEAR(ancilla_objective(c, g), kWorkedRate, 1e-13);
  const AncillaCoeffs flat = AncillaCoeffs::normalized(RealMatrix::Constant(3, 3, 1.0));
  EXPECT_NEAR(ancilla_objective(flat, random_g(2, 3)), 0.0, 1e-15);
  RealMatrix rows(2, 3);
  rows << 1.0, 1.0, 1.0, 2.0, 2.0, 2.0;
  EXPECT_NEAR(ancilla_objective(AncillaCoeffs::normalized(rows), random_g(3, 3)), 0.0, 1e-15);
}

TEST(Objective, IndexAndTraceFormsAgree) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index dap = 1 + static_cast<Index>(seed % 4);
    const Index da = 2 + static_cast<Index>((seed / 4) % 3);
    const AncillaCoeffs c = random_coeffs(seed, dap, da);
    const GBlock g = random_g(seed, da);
    EXPECT_NEAR(ancilla_objective(c, g), ancilla_objective_index_form(c, g), 1e-12);
    EXPECT_NEAR(variance_constraint(c, g), variance_constraint_index_form(c, g), 1e-12);
  }
}

TEST(Objective, DimensionMismatch) {
  EXPECT_THROW(ancilla_objective(worked_coeffs(), GBlock::zero(3)), DimensionError);
  EXPECT_THROW(variance_constraint(worked_coeffs(), GBlock::zero(3)), DimensionError);
}

TEST(Arbitration, WorkedExample) {
  RealVector u(1);
  u << -1.0;
  EXPECT_NEAR(assemble_and_arbitrate(worked_coeffs(), GBlock(2, u), kFd), kWorkedRate, 2e-6);
  EXPECT_NEAR(assemble_and_arbitrate(worked_coeffs(), GBlock::zero(2), kFd), 0.0, 1e-9);
}

TEST(Arbitration, RandomSmallInstances) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index dap = 1 + static_cast<Index>(seed % 2);
    const Index da = 2 + static_cast<Index>((seed / 2) % 2);
    const AncillaCoeffs c = random_coeffs(seed + 100, dap, da);
    const GBlock g = unit_constraint(c, random_g(seed + 100, da));
    EXPECT_NEAR(assemble_and_arbitrate(c, g, kFd), ancilla_objective(c, g), 2e-6) << "seed " << seed;
  }
}

TEST(Arbitration, AssembledSystemIsStructuredWithUnitVariance) {
  const AncillaCoeffs c = random_coeffs(9, 2, 3);
  const GBlock g = unit_constraint(c, random_g(9, 3));
  const AssembledSystem sys = assemble(c, g);
  EXPECT_TRUE(is_structured(sys.hamiltonian, 2, 3, 3, 2));
  EXPECT_NEAR(oracle::direct_stats(sys.psi, sys.hamiltonian).variance, 1.0, 1e-12);
  EXPECT_NEAR(oracle::direct_stats(sys.psi, sys.hamiltonian).mean, 0.0, 1e-14);
}

TEST(Arbitration, DimensionCap) {
  const AncillaCoeffs c = random_coeffs(1, 3, 3);
  EXPECT_THROW(assemble(c, GBlock::zero(3), 80), DimensionError);
  EXPECT_NO_THROW(assemble(c, GBlock::zero(3), 81));
}

TEST(LambdaSq, VanishingCommutator) {
  RealMatrix col = RealMatrix::Zero(3, 2);
  col.col(0) << 0.6, 0.0, 0.8;
  EXPECT_NEAR(lambda_sq(AncillaCoeffs(col), 1e-6), 0.0, 1e-15);
  RealMatrix diag = RealMatrix::Zero(2, 2);
  diag(0, 0) = std::sqrt(0.7);
  diag(1, 1) = std::sqrt(0.3);
  EXPECT_NEAR(lambda_sq(AncillaCoeffs(diag), 0.0), 0.0, 1e-15);
  const double a = 0.6;
  const double b = std::sqrt(0.5 - a * a);
  RealMatrix sym(2, 2);
  sym << a, b, b, a;
  const AncillaCoeffs cs(sym);
  EXPECT_NEAR(lambda_sq(cs, 0.0), 0.0, 1e-14);
  EXPECT_NEAR(inner_opt_over_g(cs).value, 0.0, 1e-8);
}

TEST(LambdaSq, SingularGramNeedsRegularization) {
  EXPECT_THROW(lambda_sq(worked_coeffs(), 0.0), SingularityError);
  EXPECT_TRUE(std::isfinite(lambda_sq(worked_coeffs(), 1e-6)));
  EXPECT_THROW(lambda_sq(worked_coeffs(), -1.0), ValidationError);
}

TEST(LambdaSq, NonincreasingInRegularization) {
  const AncillaCoeffs c = random_coeffs(4, 3, 3);
  double prev = lambda_sq(c, 0.0);
  for (double eps : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0}) {
    const double v = lambda_sq(c, eps);
    EXPECT_LE(v, prev * (1.0 + 1e-12));
    prev = v;
  }
}

TEST(LambdaSq, BoundsTheAntisymmetricOptimum) {
  // The closed form optimizes over every real G; the achievable optimum
  // restricts to antisymmetric G and can only be smaller.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index d = 2 + static_cast<Index>(seed % 2);
    const AncillaCoeffs c = random_coeffs(seed + 300, d, d);
    const double bound = 2.0 * std::sqrt(lambda_sq(c, 0.0));
    EXPECT_GE(bound, fixed_c_optimum(c).value - 1e-12);
  }
}

TEST(RecoverG, ZeroCommutatorGivesZero) {
  RealMatrix diag = RealMatrix::Zero(2, 2);
  diag(0, 0) = std::sqrt(0.7);
  diag(1, 1) = std::sqrt(0.3);
  const RecoveredG r = recover_g(AncillaCoeffs(diag), 1.0, 0.0);
  EXPECT_EQ(r.g.upper().norm(), 0.0);
  EXPECT_EQ(r.antisymmetry_defect, 0.0);
  EXPECT_THROW(recover_g(AncillaCoeffs(diag), 0.0, 0.0), ValidationError);
  EXPECT_THROW(recover_g(AncillaCoeffs(diag), -1.0, 0.0), ValidationError);
}

TEST(RecoverG, OutputIsAntisymmetricWithReportedDefect) {
  const AncillaCoeffs c = random_coeffs(5, 3, 3);
  const RecoveredG r = recover_g(c, 0.7, 0.0);
  const RealMatrix raw = c.commutator() * c.gram().inverse() / 0.7;
  EXPECT_NEAR(r.antisymmetry_defect, (raw + raw.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r.g.matrix() - 0.5 * (raw - raw.transpose())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FixedCOptimum, ReducesToNoAncillaCase) {
  const FixedCOptimum f = fixed_c_optimum(worked_coeffs());
  EXPECT_NEAR(f.value, kWorkedRate, 1e-13);
  EXPECT_NEAR(variance_constraint(worked_coeffs(), f.g), 1.0, 1e-13);
}

TEST(FixedCOptimum, AttainsItsValueAndMatchesIterativeSearch) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index dap = 1 + static_cast<Index>(seed % 3);
    const Index da = 2 + static_cast<Index>((seed / 3) % 3);
    const AncillaCoeffs c = random_coeffs(seed + 200, dap, da);
    const FixedCOptimum f = fixed_c_optimum(c);
    EXPECT_NEAR(variance_constraint(c, f.g), 1.0, 1e-10);
    EXPECT_NEAR(ancilla_objective(c, f.g), f.value, 1e-12);
    const InnerResult in = inner_opt_over_g(c, {4, seed, 20000, 1e-12});
    EXPECT_NEAR(in.value, f.value, 1e-9) << dap << "x" << da;
    EXPECT_NEAR(f.lambda_sq, 0.25 * f.value * f.value, 1e-15);
  }
}

TEST(FixedCOptimum, RegularizedSolveStillAttainsItsValue) {
  const AncillaCoeffs c = random_coeffs(8, 1, 4);  // rank-deficient Gram matrix
  const FixedCOptimum exact = fixed_c_optimum(c, 0.0);
  const FixedCOptimum reg = fixed_c_optimum(c, 1e-8);
  EXPECT_NEAR(ancilla_objective(c, reg.g), reg.value, 1e-12);
  EXPECT_NEAR(variance_constraint(c, reg.g), 1.0, 1e-10);
  EXPECT_NEAR(reg.value, exact.value, 1e-6);
}

TEST(InnerOpt, WorkedExampleAndUniform) {
  EXPECT_NEAR(inner_opt_over_g(worked_coeffs()).value, kWorkedRate, 1e-5);
  RealMatrix flat(1, 3);
  flat << 1.0, 1.0, 1.0;
  EXPECT_NEAR(inner_opt_over_g(AncillaCoeffs::normalized(flat)).value, 0.0, 1e-8);
}

TEST(InnerOpt, DeterministicAndValidated) {
  const AncillaCoeffs c = random_coeffs(3, 2, 3);
  const InnerResult a = inner_opt_over_g(c, {3, 42, 20000, 1e-12});
  const InnerResult b = inner_opt_over_g(c, {3, 42, 20000, 1e-12});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ((a.g.upper() - b.g.upper()).norm(), 0.0);
  EXPECT_THROW(inner_opt_over_g(c, {0, 42, 100, 1e-12}), ValidationError);
}

TEST(InnerOpt, ReportsNonConvergence) {
  const AncillaCoeffs c = random_coeffs(3, 3, 4);
  EXPECT_THROW(inner_opt_over_g(c, {2, 1, 1, 1e-15}), ConvergenceError);
}

TEST(SupSearch, ReducesToNoAncillaOptimum) {
  const AncillaOptimum r = sup_search(2, 1, {});
  EXPECT_NEAR(r.value, optimum::optimal_gamma(2).rate, 1e-4);
  EXPECT_NEAR(r.lambda1, 0.5 * r.value, 1e-15);
  EXPECT_NEAR(r.arbitrated_rate, r.value, 2e-6);
  EXPECT_GT(r.converged_fraction, 0.0);
  EXPECT_EQ(r.regularization, 1e-10);
}

TEST(SupSearch, AncillasDoNotHurt) {
  for (Index da : {2, 3}) {
    const double base = sup_search(da, 1, {}).value;
    const AncillaOptimum r = sup_search(da, 2, {});
    EXPECT_GE(r.value, base - 1e-6) << "d_A = " << da;
    EXPECT_GE(r.value, optimum::optimal_gamma(da).rate - 1e-6);
    EXPECT_NEAR(r.arbitrated_rate, r.value, 2e-6);
    EXPECT_GE(r.unconstrained_bound, r.value);
  }
}

TEST(SupSearch, Deterministic) {
  SupOptions o;
  o.seed = 17;
  o.starts = 3;
  const AncillaOptimum a = sup_search(3, 2, o);
  const AncillaOptimum b = sup_search(3, 2, o);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ((a.c_star.c() - b.c_star.c()).norm(), 0.0);
  EXPECT_EQ(a.start_records.size(), 3u);
}

TEST(SupSearch, Preconditions) {
  EXPECT_THROW(sup_search(1, 1, {}), DimensionError);
  EXPECT_THROW(sup_search(2, 0, {}), DimensionError);
  SupOptions o;
  o.starts = 0;
  EXPECT_THROW(sup_search(2, 1, o), ValidationError);
}

}  // namespace
