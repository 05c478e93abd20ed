#pragma once

// Closed-form instantaneous entanglement rate, mean energy and the
// real/imaginary variance split, all read off a Hamiltonian expressed in the
// Schmidt product basis of the state.

#include <cmath>

#include "entrate/qcore.hpp"

namespace entrate::rate {

using qcore::PureState;
using qcore::SchmidtState;

/// M(i, j) = <ii|H|jj> in the Schmidt product basis. Inherits Hermiticity from
/// H, so Re M is symmetric and Im M antisymmetric.
class SchmidtBlock {
 public:
  explicit SchmidtBlock(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("SchmidtBlock: matrix is not square");
    if (qcore::hermiticity_defect(m_) > qcore::kHermitianTolerance) {
      throw ValidationError("SchmidtBlock: M(i,j) != conj(M(j,i))");
    }
  }

  /// Block with zero real part and the given antisymmetric imaginary part.
  static SchmidtBlock from_imaginary(const RealMatrix& m_imag) {
    return SchmidtBlock(m_imag.cast<Complex>() * Complex(0.0, 1.0));
  }

  const ComplexMatrix& matrix() const { return m_; }
  RealMatrix real() const { return m_.real(); }
  RealMatrix imag() const { return m_.imag(); }
  Index d() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

struct EnergyStats {
  double mean = 0.0;
  double variance = 0.0;
  double variance_real_part = 0.0;  // Delta E^2(psi, H_R)
  double variance_imag_part = 0.0;  // <psi| H_I H_I^T |psi>
};

inline void require_compatible(const ComplexMatrix& h, const SchmidtState& state, const char* what) {
  const Index n = state.d_a() * state.d_b();
  if (h.rows() != n || h.cols() != n) {
    throw DimensionError(std::string(what) + ": Hamiltonian size does not match d_A * d_B");
  }
  qcore::require_hermitian(h, what);
}

inline SchmidtBlock schmidt_block(const ComplexMatrix& h, const SchmidtState& state) {
  require_compatible(h, state, "schmidt_block");
  const Index d = state.d();
  const Index d_b = state.d_b();
  // Only the Schmidt-paired columns |a_i>|b_i> are needed.
  ComplexMatrix w(state.d_a() * d_b, d);
  for (Index i = 0; i < d; ++i) {
    w.col(i) = Eigen::kroneckerProduct(state.basis_a().col(i), state.basis_b().col(i)).eval();
  }
  ComplexMatrix m = w.adjoint() * h * w;
  // Symmetrize away rounding so the block invariant holds exactly.
  m = 0.5 * (m + m.adjoint()).eval();
  return SchmidtBlock(std::move(m));
}

/// 4 sum_{i>j} C_i C_j log(C_i/C_j) Im M(j,i), in nats. Pairs with a zero
/// coefficient or with equal coefficients contribute exactly zero.
inline double gamma_rate(const SchmidtState& state, const SchmidtBlock& block) {
  const RealVector& c = state.coefficients();
  if (block.d() != c.size()) throw DimensionError("gamma_rate: block size != Schmidt rank bound");
  const ComplexMatrix& m = block.matrix();
  double acc = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    if (c(i) == 0.0) continue;
    for (Index j = 0; j < i; ++j) {
      if (c(j) == 0.0 || c(i) == c(j)) continue;
      acc += c(i) * c(j) * std::log(c(i) / c(j)) * m(j, i).imag();
    }
  }
  return 4.0 * acc;
}

/// -4 sum_i k_i C_i log C_i, with k = Im(M) C.
inline double gamma_rate_k(const SchmidtState& state, const RealVector& k) {
  const RealVector& c = state.coefficients();
  if (k.size() != c.size()) throw DimensionError("gamma_rate_k: k has wrong length");
  double acc = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    if (c(i) > 0.0) acc += k(i) * c(i) * std::log(c(i));
  }
  return -4.0 * acc;
}

inline RealVector k_vector(const SchmidtState& state, const SchmidtBlock& block) {
  if (block.d() != state.d()) throw DimensionError("k_vector: block size mismatch");
  return block.imag() * state.coefficients();
}

inline double mean_energy(const SchmidtState& state, const SchmidtBlock& block) {
  if (block.d() != state.d()) throw DimensionError("mean_energy: block size mismatch");
  const RealVector& c = state.coefficients();
  return c.dot(block.real() * c);
}

/// Mean, variance and the split Delta E^2 = Delta E^2(H_R) + <H_I H_I^T>,
/// with H_R, H_I the real/imaginary parts of H in the full Schmidt product
/// basis of psi (where psi has real coordinates).
inline EnergyStats energy_stats(const PureState& psi, const ComplexMatrix& h) {
  const SchmidtState state = qcore::schmidt_decompose(psi);
  require_compatible(h, state, "energy_stats");
  const ComplexMatrix w = state.product_basis();
  const ComplexMatrix hs = w.adjoint() * h * w;
  const RealMatrix h_r = hs.real();
  const RealMatrix h_i = hs.imag();

  RealVector x = RealVector::Zero(hs.rows());
  for (Index i = 0; i < state.d(); ++i) x(i * state.d_b() + i) = state.coefficients()(i);

  EnergyStats out;
  const RealVector hr_x = h_r * x;
  const RealVector hit_x = h_i.transpose() * x;
  const ComplexVector h_x = hs * x.cast<Complex>();
  out.mean = x.dot(hr_x);
  out.variance = h_x.squaredNorm() - out.mean * out.mean;
  out.variance_real_part = hr_x.squaredNorm() - out.mean * out.mean;
  out.variance_imag_part = hit_x.squaredNorm();
  return out;
}

/// Hamiltonian in the computational basis whose only nonzero entries in the
/// Schmidt product basis of `state` are <ii|H|jj> = M(i, j).
inline ComplexMatrix embed_schmidt_block(const SchmidtState& state, const SchmidtBlock& block) {
  if (block.d() != state.d()) throw DimensionError("embed_schmidt_block: block size mismatch");
  const Index n = state.d_a() * state.d_b();
  const Index d_b = state.d_b();
  ComplexMatrix hs = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < state.d(); ++i)
    for (Index j = 0; j < state.d(); ++j) hs(i * d_b + i, j * d_b + j) = block.matrix()(i, j);
  const ComplexMatrix w = state.product_basis();
  ComplexMatrix h = w * hs * w.adjoint();
  return 0.5 * (h + h.adjoint());
}

}  // namespace entrate::rate
