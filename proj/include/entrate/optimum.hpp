#pragma once

// Optimization without ancillas: for a fixed state the best rate over all
// Hamiltonians with unit energy variance is 2 sqrt(f(p)), f the variance of
// the surprisal -log p_i of p_i = C_i^2. Also the optimal state family, the
// matching Hamiltonian and the one-parameter search over that family.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "entrate/oracle.hpp"
#include "entrate/qcore.hpp"
#include "entrate/rate.hpp"

namespace entrate::optimum {

using qcore::SchmidtState;
using rate::SchmidtBlock;

/// Var_{i~p}(-log p_i) in nats^2; zero-probability outcomes are dropped.
inline double surprisal_variance(const RealVector& p) {
  double total = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= 0.0)) throw ValidationError("surprisal_variance: negative probability");
    total += p(i);
  }
  if (!(std::abs(total - 1.0) <= 1e-10)) {
    throw ValidationError("surprisal_variance: probabilities do not sum to 1");
  }
  double mean = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) mean += p(i) * std::log(p(i));
  double var = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    const double dev = std::log(p(i)) - mean;
    var += p(i) * dev * dev;
  }
  return var;
}

inline RealVector probabilities(const SchmidtState& state) {
  return state.coefficients().array().square().matrix();
}

/// Stationary point of the Lagrangian for maximizing the rate over k with
/// sum_i C_i k_i = 0 and sum_i k_i^2 = 1:
///   C_i log C_i - 2 lambda1 k_i - lambda2 C_i = 0.
/// lambda1 is the (negative) root belonging to the maximum; the positive
/// root gives the minimizer -k.
struct LagrangeSolution {
  RealVector k;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double max_rate = 0.0;
  bool degenerate = false;  // all nonzero C_i equal: the rate vanishes for every H

  double stationarity_residual(const RealVector& c) const {
    double worst = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const double clogc = c(i) > 0.0 ? c(i) * std::log(c(i)) : 0.0;
      worst = std::max(worst, std::abs(clogc - 2.0 * lambda1 * k(i) - lambda2 * c(i)));
    }
    return worst;
  }
};

inline constexpr double kDegenerateLambda = 1e-12;

inline LagrangeSolution lagrange_solve(const SchmidtState& state) {
  const RealVector& c = state.coefficients();
  const Index d = c.size();
  RealVector log_c = RealVector::Zero(d);
  for (Index i = 0; i < d; ++i)
    if (c(i) > 0.0) log_c(i) = std::log(c(i));

  LagrangeSolution out;
  out.lambda2 = c.array().square().matrix().dot(log_c);
  double spread = 0.0;
  for (Index i = 0; i < d; ++i) {
    if (c(i) > 0.0) spread += c(i) * c(i) * (log_c(i) - out.lambda2) * (log_c(i) - out.lambda2);
  }
  const double magnitude = 0.5 * std::sqrt(spread);
  out.k = RealVector::Zero(d);
  if (magnitude < kDegenerateLambda) {
    out.degenerate = true;
    return out;
  }
  out.lambda1 = -magnitude;
  for (Index i = 0; i < d; ++i) {
    if (c(i) > 0.0) out.k(i) = c(i) * (log_c(i) - out.lambda2) / (2.0 * out.lambda1);
  }
  out.max_rate = rate::gamma_rate_k(state, out.k);
  return out;
}

/// 2 sqrt(f(p)) with p_i = C_i^2, in nats.
inline double max_rate(const SchmidtState& state) {
  return 2.0 * std::sqrt(surprisal_variance(probabilities(state)));
}

/// Coefficients (sqrt(gamma), sqrt((1-gamma)/(d-1)), ...) on |00>, |11>, ...
inline SchmidtState build_optimal_state(double gamma, Index d) {
  if (d < 2) throw DimensionError("build_optimal_state: d must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("build_optimal_state: gamma outside (0,1)");
  RealVector c(d);
  c(0) = std::sqrt(gamma);
  c.tail(d - 1).setConstant(std::sqrt((1.0 - gamma) / static_cast<double>(d - 1)));
  c /= c.norm();
  return SchmidtState::from_coefficients(c, d, d);
}

/// i(|00><phi| - |phi><00|) with |phi> = sum_{i>=1} |ii> / sqrt(d-1), in the
/// computational basis. Paired with a state whose largest coefficient is on
/// |00> this drives the entropy down; the maximizing generator is its
/// negative (see build_optimal_design).
inline ComplexMatrix build_optimal_hamiltonian(Index d_a, Index d_b) {
  if (d_a != d_b) throw DimensionError("build_optimal_hamiltonian: requires d_A == d_B");
  if (d_a < 2) throw DimensionError("build_optimal_hamiltonian: d must be >= 2");
  const Index d = d_a;
  const double amp = 1.0 / std::sqrt(static_cast<double>(d - 1));
  ComplexMatrix h = ComplexMatrix::Zero(d * d, d * d);
  for (Index i = 1; i < d; ++i) {
    const Index ii = i * d + i;
    h(0, ii) = Complex(0.0, amp);
    h(ii, 0) = Complex(0.0, -amp);
  }
  return h;
}

struct OptimalDesign {
  double gamma = 0.0;
  Index d = 0;
  SchmidtState state;
  ComplexMatrix hamiltonian;
  double rate = 0.0;          // closed-form rate of (state, hamiltonian), nats
  double variance_scale = 1.0;  // factor applied to reach unit energy variance
};

/// The optimal state for `gamma` paired with the rate-maximizing generator,
/// rescaled to unit energy variance on that state.
inline OptimalDesign build_optimal_design(double gamma, Index d) {
  SchmidtState state = build_optimal_state(gamma, d);
  ComplexMatrix h = -build_optimal_hamiltonian(d, d);
  const auto stats = oracle::direct_stats(state.to_pure_state(), h);
  const double scale = 1.0 / std::sqrt(stats.variance);
  h *= scale;
  const double r = rate::gamma_rate(state, rate::schmidt_block(h, state));
  return OptimalDesign{gamma, d, std::move(state), std::move(h), r, scale};
}

/// 2 sqrt(gamma(1-gamma)) log(gamma(d-1)/(1-gamma)) in nats.
inline double gamma_objective(double gamma, Index d) {
  return 2.0 * std::sqrt(gamma * (1.0 - gamma)) *
         std::log(gamma * static_cast<double>(d - 1) / (1.0 - gamma));
}

struct GammaOptimum {
  double gamma = 0.0;
  double rate = 0.0;
};

/// Maximizes gamma_objective over (0,1): a uniform grid of 10^4 interior
/// points followed by golden-section refinement around the best cell.
inline GammaOptimum optimal_gamma(Index d, int grid_points = 10000) {
  if (d < 2) throw DimensionError("optimal_gamma: d must be >= 2");
  const double h = 1.0 / (grid_points + 1);
  int best = 1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid_points; ++i) {
    const double v = gamma_objective(i * h, d);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = std::max((best - 1) * h, h * 1e-3);
  double hi = std::min((best + 1) * h, 1.0 - h * 1e-3);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = gamma_objective(x1, d);
  double f2 = gamma_objective(x2, d);
  while (hi - lo > 1e-13) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = gamma_objective(x2, d);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = gamma_objective(x1, d);
    }
  }
  GammaOptimum out{0.5 * (lo + hi), 0.0};
  out.rate = gamma_objective(out.gamma, d);
  if (best_val > out.rate) out = {best * h, best_val};
  return out;
}

/// gamma_objective sampled at n interior points gamma_i = (i+1)/(n+1).
inline std::vector<std::pair<double, double>> gamma_curve(Index d, int n) {
  if (n < 1) throw ValidationError("gamma_curve: need at least one point");
  if (d < 2) throw DimensionError("gamma_curve: d must be >= 2");
  std::vector<std::pair<double, double>> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double g = static_cast<double>(i + 1) / (n + 1);
    rows.emplace_back(g, gamma_objective(g, d));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Oracle and achievability.

/// Best value of -4 sum_i k_i C_i log C_i on {|k| = 1, C.k = 0}, found by
/// projected gradient ascent from `trials` random starts.
inline double brute_force_max_k(const SchmidtState& state, int trials, std::uint64_t seed,
                                int max_iter = 2000) {
  if (trials < 1) throw ValidationError("brute_force_max_k: trials must be >= 1");
  const RealVector& c = state.coefficients();
  const Index d = c.size();
  RealVector grad(d);
  for (Index i = 0; i < d; ++i) grad(i) = c(i) > 0.0 ? -4.0 * c(i) * std::log(c(i)) : 0.0;

  const auto project = [&](RealVector v) -> RealVector {
    v -= (c.dot(v) / c.squaredNorm()) * c;
    const double n = v.norm();
    return n > 0.0 ? RealVector(v / n) : v;
  };
  const double step = 10.0 / std::max((grad - (c.dot(grad) / c.squaredNorm()) * c).norm(), 1e-300);

  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    auto rng = qcore::make_engine(seed, static_cast<std::uint64_t>(t));
    std::normal_distribution<double> n01(0.0, 1.0);
    RealVector k(d);
    for (Index i = 0; i < d; ++i) k(i) = n01(rng);
    k = project(k);
    if (d == 1 || k.norm() == 0.0) {
      best = std::max(best, 0.0);
      continue;
    }
    for (int it = 0; it < max_iter; ++it) {
      RealVector next = project(k + step * grad);
      if (next.norm() == 0.0) break;
      const double change = (next - k).norm();
      k = std::move(next);
      if (change < 1e-15) break;
    }
    best = std::max(best, grad.dot(k));
  }
  return best;
}

/// Minimal-Frobenius-norm antisymmetric M with M C = k, from a least-squares
/// solve over the strict upper triangle.
inline RealMatrix antisymmetric_solve(const RealVector& c, const RealVector& k) {
  const Index d = c.size();
  if (k.size() != d) throw DimensionError("antisymmetric_solve: length mismatch");
  const Index m = d * (d - 1) / 2;
  if (m == 0) return RealMatrix::Zero(d, d);
  // Parameter x_(i<j) stands for M(i,j) = x, M(j,i) = -x; scaling columns by
  // sqrt(2) makes the parameter norm equal the Frobenius norm of M.
  const double s = std::sqrt(2.0);
  RealMatrix a = RealMatrix::Zero(d, m);
  Index col = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j, ++col) {
      a(i, col) = c(j) / s;
      a(j, col) = -c(i) / s;
    }
  const RealVector x = Eigen::CompleteOrthogonalDecomposition<RealMatrix>(a).solve(k);
  RealMatrix out = RealMatrix::Zero(d, d);
  col = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j, ++col) {
      out(i, j) = x(col) / s;
      out(j, i) = -x(col) / s;
    }
  return out;
}

struct AchievingDesign {
  RealMatrix block_imag;    // M_I with M_I C = k
  ComplexMatrix hamiltonian;  // computational basis, supported on span{|a_i b_i>}
};

/// Realizes a feasible k by a Hamiltonian whose Schmidt block is i*M_I.
inline AchievingDesign achieving_hamiltonian(const SchmidtState& state, const RealVector& k) {
  AchievingDesign out;
  out.block_imag = antisymmetric_solve(state.coefficients(), k);
  out.hamiltonian = rate::embed_schmidt_block(state, SchmidtBlock::from_imaginary(out.block_imag));
  return out;
}

}  // namespace entrate::optimum
