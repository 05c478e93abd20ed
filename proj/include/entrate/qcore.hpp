#pragma once

// Dense complex linear algebra for bipartite pure states: Schmidt
// decomposition, partial trace, von Neumann entropy, Hermitian exponential
// and seeded random states/Hamiltonians.
//
// Index convention: a vector on H_A (x) H_B is indexed a * d_B + b, which is
// the layout produced by Eigen's kroneckerProduct(A, B).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "entrate/errors.hpp"

namespace entrate {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Logarithm base used when reporting entropies and rates. All internal
/// arithmetic is in nats; `bits` is a conversion applied at the output.
enum class LogBase { nat, bits };

inline double log_base_factor(LogBase base) {
  return base == LogBase::nat ? 1.0 : 1.0 / std::log(2.0);
}

inline double to_base(double nats, LogBase base) { return nats * log_base_factor(base); }

namespace qcore {

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-10;

inline double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  const auto n = u.rows();
  return (u.adjoint() * u - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const ComplexMatrix& m, const char* what,
                              double tol = kHermitianTolerance) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  const double defect = hermiticity_defect(m);
  if (!(defect <= tol)) {
    throw ValidationError(std::string(what) + ": matrix is not Hermitian (defect " +
                          std::to_string(defect) + ")");
  }
}

/// Normalized pure state on H_A (x) H_B.
class PureState {
 public:
  PureState(Index d_a, Index d_b, ComplexVector amplitudes)
      : d_a_(d_a), d_b_(d_b), amplitudes_(std::move(amplitudes)) {
    if (d_a_ < 1 || d_b_ < 1) throw DimensionError("PureState: dimensions must be >= 1");
    if (amplitudes_.size() != d_a_ * d_b_) {
      throw DimensionError("PureState: amplitude count != d_A * d_B");
    }
    const double norm = amplitudes_.norm();
    if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
      throw ValidationError("PureState: amplitudes are not normalized (norm " +
                            std::to_string(norm) + ")");
    }
  }

  /// Builds a state from its d_A x d_B amplitude matrix psi(a, b).
  static PureState from_matrix(const ComplexMatrix& psi) {
    ComplexVector v(psi.size());
    for (Index a = 0; a < psi.rows(); ++a)
      for (Index b = 0; b < psi.cols(); ++b) v(a * psi.cols() + b) = psi(a, b);
    return PureState(psi.rows(), psi.cols(), std::move(v));
  }

  /// Rescales arbitrary nonzero amplitudes onto the unit sphere.
  static PureState normalized(Index d_a, Index d_b, ComplexVector amplitudes) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0)) throw ValidationError("PureState: zero vector cannot be normalized");
    amplitudes /= norm;
    return PureState(d_a, d_b, std::move(amplitudes));
  }

  Index d_a() const { return d_a_; }
  Index d_b() const { return d_b_; }
  Index dim() const { return d_a_ * d_b_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }

  ComplexMatrix as_matrix() const {
    ComplexMatrix psi(d_a_, d_b_);
    for (Index a = 0; a < d_a_; ++a)
      for (Index b = 0; b < d_b_; ++b) psi(a, b) = amplitudes_(a * d_b_ + b);
    return psi;
  }

  ComplexMatrix density() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  Index d_a_;
  Index d_b_;
  ComplexVector amplitudes_;
};

/// Schmidt form sum_i C_i |a_i>|b_i>, where |a_i> (|b_i>) is column i of
/// basis_a (basis_b). Coefficients are nonnegative, nonincreasing and have
/// unit 2-norm; the bases are full unitaries on each side.
class SchmidtState {
 public:
  SchmidtState(RealVector coefficients, ComplexMatrix basis_a, ComplexMatrix basis_b)
      : coefficients_(std::move(coefficients)),
        basis_a_(std::move(basis_a)),
        basis_b_(std::move(basis_b)) {
    const Index d = std::min(basis_a_.rows(), basis_b_.rows());
    if (basis_a_.rows() < 1 || basis_b_.rows() < 1) {
      throw DimensionError("SchmidtState: dimensions must be >= 1");
    }
    if (coefficients_.size() != d) {
      throw DimensionError("SchmidtState: need min(d_A, d_B) coefficients");
    }
    if (unitarity_defect(basis_a_) > kUnitaryTolerance ||
        unitarity_defect(basis_b_) > kUnitaryTolerance) {
      throw ValidationError("SchmidtState: Schmidt bases must be unitary");
    }
    for (Index i = 0; i < d; ++i) {
      if (!(coefficients_(i) >= 0.0)) {
        throw ValidationError("SchmidtState: coefficients must be nonnegative");
      }
      if (i > 0 && coefficients_(i) > coefficients_(i - 1)) {
        throw ValidationError("SchmidtState: coefficients must be nonincreasing");
      }
    }
    if (!(std::abs(coefficients_.squaredNorm() - 1.0) <= kNormTolerance)) {
      throw ValidationError("SchmidtState: sum of squared coefficients != 1");
    }
  }

  /// Coefficients in any order, paired with the computational basis
  /// (coefficient i sits on |i>|i>). Sorted stably into canonical order; the
  /// bases become the matching permutation matrices.
  static SchmidtState from_coefficients(const RealVector& coefficients, Index d_a, Index d_b) {
    const Index d = std::min(d_a, d_b);
    if (coefficients.size() != d) {
      throw DimensionError("SchmidtState: need min(d_A, d_B) coefficients");
    }
    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
      return coefficients(x) > coefficients(y);
    });
    RealVector sorted(d);
    ComplexMatrix basis_a = ComplexMatrix::Zero(d_a, d_a);
    ComplexMatrix basis_b = ComplexMatrix::Zero(d_b, d_b);
    for (Index i = 0; i < d; ++i) {
      const Index src = order[static_cast<std::size_t>(i)];
      sorted(i) = coefficients(src);
      basis_a(src, i) = 1.0;
      basis_b(src, i) = 1.0;
    }
    for (Index i = d; i < d_a; ++i) basis_a(i, i) = 1.0;
    for (Index i = d; i < d_b; ++i) basis_b(i, i) = 1.0;
    return SchmidtState(std::move(sorted), std::move(basis_a), std::move(basis_b));
  }

  const RealVector& coefficients() const { return coefficients_; }
  const ComplexMatrix& basis_a() const { return basis_a_; }
  const ComplexMatrix& basis_b() const { return basis_b_; }
  Index d_a() const { return basis_a_.rows(); }
  Index d_b() const { return basis_b_.rows(); }
  Index d() const { return coefficients_.size(); }

  Index schmidt_rank(double tol = 1e-12) const {
    return static_cast<Index>((coefficients_.array() > tol).count());
  }

  /// basis_a (x) basis_b: maps Schmidt product-basis coordinates to
  /// computational coordinates.
  ComplexMatrix product_basis() const {
    return Eigen::kroneckerProduct(basis_a_, basis_b_).eval();
  }

  PureState to_pure_state() const {
    ComplexVector v = ComplexVector::Zero(d_a() * d_b());
    for (Index i = 0; i < d(); ++i) {
      if (coefficients_(i) == 0.0) continue;
      v += coefficients_(i) *
           Eigen::kroneckerProduct(basis_a_.col(i), basis_b_.col(i)).eval();
    }
    return PureState::normalized(d_a(), d_b(), std::move(v));
  }

 private:
  RealVector coefficients_;
  ComplexMatrix basis_a_;
  ComplexMatrix basis_b_;
};

inline SchmidtState schmidt_decompose(const PureState& psi) {
  // psi(a,b) = sum_i s_i U(a,i) conj(V(b,i)), so |b_i> = conj(V) column i.
  Eigen::JacobiSVD<ComplexMatrix> svd(psi.as_matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  RealVector s = svd.singularValues();
  // Singular values of a unit vector carry rounding at the 1e-16 level;
  // renormalize so the coefficient invariant holds exactly.
  s /= s.norm();
  return SchmidtState(std::move(s), svd.matrixU(), svd.matrixV().conjugate());
}

inline ComplexMatrix partial_trace_b(const ComplexMatrix& rho, Index d_a, Index d_b) {
  if (d_a < 1 || d_b < 1 || rho.rows() != d_a * d_b || rho.cols() != d_a * d_b) {
    throw DimensionError("partial_trace_b: rho must be (d_A*d_B) x (d_A*d_B)");
  }
  ComplexMatrix out = ComplexMatrix::Zero(d_a, d_a);
  for (Index a = 0; a < d_a; ++a)
    for (Index ap = 0; ap < d_a; ++ap) {
      Complex acc = 0.0;
      for (Index b = 0; b < d_b; ++b) acc += rho(a * d_b + b, ap * d_b + b);
      out(a, ap) = acc;
    }
  return out;
}

inline constexpr double kEntropyNegativeTolerance = 1e-8;
inline constexpr double kEntropyEigenFloor = 1e-12;

/// -tr(rho log rho). Eigenvalues at or below the floor (1e-12) contribute
/// zero; anything below -1e-8 is rejected.
inline double von_neumann_entropy(const ComplexMatrix& rho, LogBase base = LogBase::nat) {
  require_hermitian(rho, "von_neumann_entropy");
  const double tr = rho.trace().real();
  if (!(std::abs(tr - 1.0) <= 1e-8)) {
    throw ValidationError("von_neumann_entropy: trace != 1 (" + std::to_string(tr) + ")");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam < -kEntropyNegativeTolerance) {
      throw ValidationError("von_neumann_entropy: negative eigenvalue " + std::to_string(lam));
    }
    if (lam <= kEntropyEigenFloor) continue;
    s -= lam * std::log(lam);
  }
  return to_base(std::max(s, 0.0), base);
}

inline double entanglement_entropy(const PureState& psi, LogBase base = LogBase::nat) {
  return von_neumann_entropy(partial_trace_b(psi.density(), psi.d_a(), psi.d_b()), base);
}

/// exp(-i H t) through the eigendecomposition H = V diag(l) V^dagger.
inline ComplexMatrix herm_expm(const ComplexMatrix& h, double t) {
  require_hermitian(h, "herm_expm");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const RealVector& lam = es.eigenvalues();
  ComplexVector phases(lam.size());
  for (Index i = 0; i < lam.size(); ++i) phases(i) = std::polar(1.0, -lam(i) * t);
  const ComplexMatrix& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

// ---------------------------------------------------------------------------
// Seeded generators. Each call owns its engine, so results depend only on
// (arguments, seed).

/// Engine for stream `stream` of a multi-start run; independent of how the
/// streams are scheduled.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

inline ComplexMatrix complex_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = n01(rng);
      const double im = n01(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

inline PureState random_state(Index d_a, Index d_b, std::mt19937_64& rng) {
  if (d_a < 1 || d_b < 1) throw DimensionError("random_state: dimensions must be >= 1");
  ComplexVector v = complex_gaussian(d_a * d_b, 1, rng).col(0);
  return PureState::normalized(d_a, d_b, std::move(v));
}

inline PureState random_state(Index d_a, Index d_b, std::uint64_t seed) {
  auto rng = make_engine(seed);
  return random_state(d_a, d_b, rng);
}

inline ComplexMatrix random_hermitian(Index n, std::mt19937_64& rng) {
  if (n < 1) throw DimensionError("random_hermitian: dimension must be >= 1");
  const ComplexMatrix a = complex_gaussian(n, n, rng);
  ComplexMatrix h = 0.5 * (a + a.adjoint());
  // Enforce exact Hermiticity of the stored representation.
  for (Index i = 0; i < n; ++i) {
    h(i, i) = h(i, i).real();
    for (Index j = i + 1; j < n; ++j) h(j, i) = std::conj(h(i, j));
  }
  return h;
}

inline ComplexMatrix random_hermitian(Index n, std::uint64_t seed) {
  auto rng = make_engine(seed);
  return random_hermitian(n, rng);
}

/// Haar unitary: QR of a complex Ginibre matrix with the phases of R's
/// diagonal divided out.
inline ComplexMatrix random_unitary(Index n, std::mt19937_64& rng) {
  if (n < 1) throw DimensionError("random_unitary: dimension must be >= 1");
  Eigen::HouseholderQR<ComplexMatrix> qr(complex_gaussian(n, n, rng));
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

inline ComplexMatrix random_unitary(Index n, std::uint64_t seed) {
  auto rng = make_engine(seed);
  return random_unitary(n, rng);
}

}  // namespace qcore
}  // namespace entrate
