#pragma once

// Ancilla-assisted rates. Alice holds A' (x) A, Bob holds B (x) B', the
// Hamiltonian is I_A' (x) H_AB (x) I_B' and the global state is
//   sum_{alpha,beta} C(alpha,beta) |alpha>_A' |beta>_A |beta>_B |alpha>_B'.
// With K = C log C (entrywise) and G(i,j) = Im <ii|H_AB|jj>, the rate is
//   2 tr((K^T C - C^T K) G)
// and the energy variance spent by the Schmidt-diagonal part of H_AB is
// ||C G||_F^2.
//
// Tensor order of every assembled object is A' (x) A (x) B (x) B'.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "entrate/optimum.hpp"
#include "entrate/oracle.hpp"
#include "entrate/qcore.hpp"

namespace entrate::ancilla {

/// Nonnegative d_A' x d_A coefficient matrix with unit Frobenius norm, and
/// K = C log C (zero where C is zero).
class AncillaCoeffs {
 public:
  explicit AncillaCoeffs(RealMatrix c) : c_(std::move(c)) {
    if (c_.rows() < 1 || c_.cols() < 1) throw DimensionError("AncillaCoeffs: empty matrix");
    if (!(c_.minCoeff() >= 0.0)) throw ValidationError("AncillaCoeffs: entries must be >= 0");
    if (!(std::abs(c_.norm() - 1.0) <= 1e-12)) {
      throw ValidationError("AncillaCoeffs: Frobenius norm != 1");
    }
    k_ = c_.unaryExpr([](double x) { return x > 0.0 ? x * std::log(x) : 0.0; });
  }

  /// Takes |entries|, raises them to at least `floor`, then normalizes.
  static AncillaCoeffs normalized(RealMatrix c, double floor = 0.0) {
    c = c.cwiseAbs().cwiseMax(floor);
    const double n = c.norm();
    if (!(n > 0.0)) throw ValidationError("AncillaCoeffs: zero matrix");
    return AncillaCoeffs(c / n);
  }

  const RealMatrix& c() const { return c_; }
  const RealMatrix& k() const { return k_; }
  Index d_ancilla() const { return c_.rows(); }
  Index d_a() const { return c_.cols(); }

  /// C^T K - K^T C (antisymmetric, d_A x d_A).
  RealMatrix commutator() const { return c_.transpose() * k_ - k_.transpose() * c_; }
  RealMatrix gram() const { return c_.transpose() * c_; }

 private:
  RealMatrix c_;
  RealMatrix k_;
};

/// Real antisymmetric d_A x d_A matrix, stored as its strict upper triangle
/// in row-major order (0,1), (0,2), ..., (1,2), ...
class GBlock {
 public:
  GBlock(Index d, RealVector upper) : d_(d), upper_(std::move(upper)) {
    if (d_ < 1) throw DimensionError("GBlock: dimension must be >= 1");
    if (upper_.size() != d_ * (d_ - 1) / 2) throw DimensionError("GBlock: wrong parameter count");
  }

  static GBlock zero(Index d) { return GBlock(d, RealVector::Zero(d * (d - 1) / 2)); }

  static GBlock from_matrix(const RealMatrix& g, double tol = 1e-10) {
    if (g.rows() != g.cols()) throw DimensionError("GBlock: matrix is not square");
    const Index d = g.rows();
    if ((g + g.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw ValidationError("GBlock: matrix is not antisymmetric");
    }
    RealVector u(d * (d - 1) / 2);
    Index p = 0;
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j) u(p++) = 0.5 * (g(i, j) - g(j, i));
    return GBlock(d, std::move(u));
  }

  /// Unit generator: +1 at the p-th upper position, -1 mirrored.
  static GBlock unit(Index d, Index p) {
    RealVector u = RealVector::Zero(d * (d - 1) / 2);
    u(p) = 1.0;
    return GBlock(d, std::move(u));
  }

  RealMatrix matrix() const {
    RealMatrix g = RealMatrix::Zero(d_, d_);
    Index p = 0;
    for (Index i = 0; i < d_; ++i)
      for (Index j = i + 1; j < d_; ++j, ++p) {
        g(i, j) = upper_(p);
        g(j, i) = -upper_(p);
      }
    return g;
  }

  Index d() const { return d_; }
  Index parameter_count() const { return upper_.size(); }
  const RealVector& upper() const { return upper_; }

 private:
  Index d_;
  RealVector upper_;
};

inline void require_match(const AncillaCoeffs& coeffs, const GBlock& g, const char* what) {
  if (coeffs.d_a() != g.d()) throw DimensionError(std::string(what) + ": d_A of C and G differ");
}

// ---------------------------------------------------------------------------
// Structured Hamiltonians.

/// I_A' (x) H_AB (x) I_B'.
inline ComplexMatrix build_structured_hamiltonian(const ComplexMatrix& h_ab, Index d_ap, Index d_bp) {
  qcore::require_hermitian(h_ab, "build_structured_hamiltonian");
  if (d_ap < 1 || d_bp < 1) throw DimensionError("build_structured_hamiltonian: ancilla dims must be >= 1");
  const ComplexMatrix inner = Eigen::kroneckerProduct(h_ab, ComplexMatrix::Identity(d_bp, d_bp)).eval();
  return Eigen::kroneckerProduct(ComplexMatrix::Identity(d_ap, d_ap), inner).eval();
}

/// True iff H on A' (x) A (x) B (x) B' has elements only between basis states
/// with equal ancilla labels, each such block being the same H_AB.
inline bool is_structured(const ComplexMatrix& h, Index d_ap, Index d_a, Index d_b, Index d_bp,
                          double tol = 1e-12) {
  const Index n = d_ap * d_a * d_b * d_bp;
  if (h.rows() != n || h.cols() != n) return false;
  const Index core = d_a * d_b;
  const auto split = [&](Index idx, Index& ap, Index& ab, Index& bp) {
    bp = idx % d_bp;
    ab = (idx / d_bp) % core;
    ap = idx / (d_bp * core);
  };
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      Index rap, rab, rbp, cap, cab, cbp;
      split(r, rap, rab, rbp);
      split(c, cap, cab, cbp);
      const Complex v = h(r, c);
      if (rap != cap || rbp != cbp) {
        if (std::abs(v) > tol) return false;
        continue;
      }
      if (std::abs(v - h(rab * d_bp, cab * d_bp)) > tol) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Objective and constraint, each in matrix form and index-sum form.

inline double ancilla_objective(const AncillaCoeffs& coeffs, const GBlock& g) {
  require_match(coeffs, g, "ancilla_objective");
  const RealMatrix& c = coeffs.c();
  const RealMatrix& k = coeffs.k();
  return 2.0 * ((k.transpose() * c - c.transpose() * k) * g.matrix()).trace();
}

/// 2 sum_alpha sum_{beta,delta} C(a,b) C(a,d) log(C(a,b)/C(a,d)) G(d,b).
inline double ancilla_objective_index_form(const AncillaCoeffs& coeffs, const GBlock& g) {
  require_match(coeffs, g, "ancilla_objective_index_form");
  const RealMatrix& c = coeffs.c();
  const RealMatrix gm = g.matrix();
  double acc = 0.0;
  for (Index a = 0; a < c.rows(); ++a)
    for (Index b = 0; b < c.cols(); ++b)
      for (Index d = 0; d < c.cols(); ++d) {
        const double x = c(a, b);
        const double y = c(a, d);
        if (x == 0.0 || y == 0.0) continue;
        acc += x * y * std::log(x / y) * gm(d, b);
      }
  return 2.0 * acc;
}

inline double variance_constraint(const AncillaCoeffs& coeffs, const GBlock& g) {
  require_match(coeffs, g, "variance_constraint");
  return (coeffs.c() * g.matrix()).squaredNorm();
}

/// sum_{alpha,j} (sum_beta C(alpha,beta) G(beta,j))^2.
inline double variance_constraint_index_form(const AncillaCoeffs& coeffs, const GBlock& g) {
  require_match(coeffs, g, "variance_constraint_index_form");
  const RealMatrix& c = coeffs.c();
  const RealMatrix gm = g.matrix();
  double acc = 0.0;
  for (Index a = 0; a < c.rows(); ++a)
    for (Index j = 0; j < c.cols(); ++j) {
      double inner = 0.0;
      for (Index b = 0; b < c.cols(); ++b) inner += c(a, b) * gm(b, j);
      acc += inner * inner;
    }
  return acc;
}

// ---------------------------------------------------------------------------
// Fixed-C closed forms.

inline constexpr double kSingularCondition = 1e12;

/// (C^T C + eps I)^{-1}; eps == 0 demands a well-conditioned Gram matrix.
inline RealMatrix regularized_gram_inverse(const AncillaCoeffs& coeffs, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("regularization must be >= 0");
  const RealMatrix p = coeffs.gram();
  const Index n = p.rows();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(p);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (eps == 0.0 && (!(lo > 0.0) || hi / lo > kSingularCondition)) {
    throw SingularityError("C^T C is singular (condition number > 1e12); use eps > 0");
  }
  const RealVector inv = (es.eigenvalues().array() + eps).inverse().matrix();
  (void)n;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// tr(A^T A (C^T C + eps I)^{-1}) with A = C^T K - K^T C.
inline double lambda_sq(const AncillaCoeffs& coeffs, double eps) {
  const RealMatrix a = coeffs.commutator();
  return (a.transpose() * a * regularized_gram_inverse(coeffs, eps)).trace();
}

struct RecoveredG {
  GBlock g;
  double antisymmetry_defect = 0.0;  // max |X + X^T| of the unprojected formula
};

/// G = (1/lambda1) (C^T K - K^T C)(C^T C + eps I)^{-1}, projected onto the
/// antisymmetric matrices.
inline RecoveredG recover_g(const AncillaCoeffs& coeffs, double lambda1, double eps) {
  if (!(lambda1 > 0.0)) throw ValidationError("recover_g: lambda1 must be > 0");
  const RealMatrix x = coeffs.commutator() * regularized_gram_inverse(coeffs, eps) / lambda1;
  const RealMatrix sym = x + x.transpose();
  const double defect = sym.size() ? sym.cwiseAbs().maxCoeff() : 0.0;
  return {GBlock::from_matrix(0.5 * (x - x.transpose()), std::numeric_limits<double>::infinity()),
          defect};
}

/// Linear coefficients b and Gram matrix Q of the G-problem in the upper
/// triangle parameters: objective = b.g, constraint = g^T Q g.
struct GProblem {
  RealVector b;
  RealMatrix q;
};

inline GProblem g_problem(const AncillaCoeffs& coeffs) {
  const Index d = coeffs.d_a();
  const Index m = d * (d - 1) / 2;
  GProblem out{RealVector(m), RealMatrix(m, m)};
  std::vector<RealMatrix> cg;
  cg.reserve(static_cast<std::size_t>(m));
  for (Index p = 0; p < m; ++p) {
    const GBlock e = GBlock::unit(d, p);
    out.b(p) = ancilla_objective(coeffs, e);
    cg.push_back(coeffs.c() * e.matrix());
  }
  for (Index p = 0; p < m; ++p)
    for (Index r = 0; r < m; ++r) out.q(p, r) = (cg[p].array() * cg[r].array()).sum();
  return out;
}

struct FixedCOptimum {
  double value = 0.0;      // best rate 2 tr((K^T C - C^T K) G) at ||CG||_F = 1
  double lambda_sq = 0.0;  // (value / 2)^2
  GBlock g;
};

/// Exact optimum over antisymmetric G at fixed C: value = sqrt(b^T Q^+ b).
/// With eps > 0 the solve uses Q + eps I and the resulting G is rescaled to
/// the constraint exactly, so `value` is always attained by `g`.
inline FixedCOptimum fixed_c_optimum(const AncillaCoeffs& coeffs, double eps = 0.0) {
  const Index d = coeffs.d_a();
  FixedCOptimum out{0.0, 0.0, GBlock::zero(d)};
  if (d < 2) return out;
  const GProblem prob = g_problem(coeffs);
  if (prob.b.norm() == 0.0) return out;
  RealVector g;
  if (eps > 0.0) {
    const RealMatrix reg = prob.q + eps * RealMatrix::Identity(prob.q.rows(), prob.q.cols());
    g = reg.ldlt().solve(prob.b);
  } else {
    g = Eigen::CompleteOrthogonalDecomposition<RealMatrix>(prob.q).solve(prob.b);
  }
  const double norm_sq = g.dot(prob.q * g);
  if (!(norm_sq > 0.0)) return out;
  g /= std::sqrt(norm_sq);
  out.value = prob.b.dot(g);
  out.lambda_sq = 0.25 * out.value * out.value;
  out.g = GBlock(d, std::move(g));
  return out;
}

// ---------------------------------------------------------------------------
// Iterative optimum over G (oracle for the fixed-C closed forms).

struct InnerOptions {
  int starts = 8;
  std::uint64_t seed = 0;
  int max_iter = 20000;
  double tolerance = 1e-12;  // tangent-gradient norm, relative to |b|
};

struct InnerResult {
  double value = 0.0;
  GBlock g = GBlock::zero(1);
  int converged_starts = 0;
  int starts = 0;
  int iterations = 0;  // summed over starts
};

/// Maximizes ancilla_objective over antisymmetric G subject to
/// variance_constraint = 1 by projected gradient ascent on the upper
/// triangle: step along the tangent component of the gradient, then rescale
/// back onto ||CG||_F = 1.
inline InnerResult inner_opt_over_g(const AncillaCoeffs& coeffs, const InnerOptions& opt = {}) {
  if (opt.starts < 1) throw ValidationError("inner_opt_over_g: starts must be >= 1");
  const Index d = coeffs.d_a();
  const Index m = d * (d - 1) / 2;
  InnerResult out;
  out.g = GBlock::zero(d);
  out.starts = opt.starts;
  if (m == 0) {
    out.converged_starts = opt.starts;
    return out;
  }
  const GProblem prob = g_problem(coeffs);
  const double b_norm = prob.b.norm();
  if (b_norm == 0.0) {
    out.converged_starts = opt.starts;
    return out;
  }
  const auto constraint = [&](const RealVector& g) { return g.dot(prob.q * g); };

  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < opt.starts; ++s) {
    auto rng = qcore::make_engine(opt.seed, static_cast<std::uint64_t>(s));
    std::normal_distribution<double> n01(0.0, 1.0);
    RealVector g(m);
    double c0 = 0.0;
    for (int tries = 0; tries < 16 && !(c0 > 1e-12); ++tries) {
      for (Index p = 0; p < m; ++p) g(p) = n01(rng);
      c0 = constraint(g);
    }
    if (!(c0 > 0.0)) continue;
    g /= std::sqrt(c0);
    if (prob.b.dot(g) < 0.0) g = -g;  // the constraint is even, the objective odd
    double f = prob.b.dot(g);
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      const RealVector qg = prob.q * g;
      const double qg_sq = qg.squaredNorm();
      const RealVector tangent = qg_sq > 0.0 ? RealVector(prob.b - (prob.b.dot(qg) / qg_sq) * qg) : prob.b;
      if (tangent.norm() <= opt.tolerance * b_norm) {
        converged = true;
        break;
      }
      // Exact line search on s -> b.(g + s t) / sqrt((g + s t)^T Q (g + s t)).
      // With g^T Q g = 1 and t orthogonal to Qg the maximizer is |t|^2 / (f t^T Q t).
      const double t_sq = tangent.squaredNorm();
      const double q2 = tangent.dot(prob.q * tangent);
      double s = (f > 0.0 && q2 > 0.0) ? t_sq / (f * q2) : 1.0 / b_norm;
      const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
      RealVector trial;
      double ft = -std::numeric_limits<double>::infinity();
      for (int halvings = 0; halvings < 60; ++halvings, s *= 0.5) {
        trial = g + s * tangent;
        const double ct = constraint(trial);
        if (!(ct > 0.0)) continue;
        trial /= std::sqrt(ct);
        ft = prob.b.dot(trial);
        if (ft >= f - slack) break;
      }
      if (!(ft >= f - slack)) {
        converged = tangent.norm() <= 1e-8 * b_norm;
        break;
      }
      g = std::move(trial);
      f = ft;
    }
    out.iterations += it;
    if (converged) ++out.converged_starts;
    if (f > best) {
      best = f;
      out.value = f;
      out.g = GBlock(d, g);
    }
  }
  if (out.converged_starts == 0) {
    throw ConvergenceError("inner_opt_over_g: no start converged (best value " +
                           std::to_string(best) + ", " + std::to_string(out.iterations) +
                           " iterations)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly of the full system and finite-difference arbitration.

struct AssembledSystem {
  qcore::PureState psi;
  ComplexMatrix hamiltonian;  // I_A' (x) H_AB (x) I_B'
  ComplexMatrix h_ab;
};

inline Index dim_cap_from_env(Index fallback = 4096) {
  if (const char* env = std::getenv("ENTRATE_DIM_CAP")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) return static_cast<Index>(v);
  }
  return fallback;
}

/// Global state sum C(a,b) |a>_A'|b>_A|b>_B|a>_B' and the structured
/// Hamiltonian whose H_AB has <ii|H_AB|jj> = i G(i,j) and nothing else.
inline AssembledSystem assemble(const AncillaCoeffs& coeffs, const GBlock& g, Index dim_cap = 4096) {
  require_match(coeffs, g, "assemble");
  const Index d_ap = coeffs.d_ancilla();
  const Index d_a = coeffs.d_a();
  const Index n = d_ap * d_a * d_a * d_ap;
  if (n > dim_cap) {
    throw DimensionError("assemble: product dimension " + std::to_string(n) + " exceeds cap " +
                         std::to_string(dim_cap));
  }
  ComplexVector amps = ComplexVector::Zero(n);
  for (Index a = 0; a < d_ap; ++a)
    for (Index b = 0; b < d_a; ++b) {
      const Index idx = ((a * d_a + b) * d_a + b) * d_ap + a;
      amps(idx) = coeffs.c()(a, b);
    }
  const RealMatrix gm = g.matrix();
  ComplexMatrix h_ab = ComplexMatrix::Zero(d_a * d_a, d_a * d_a);
  for (Index i = 0; i < d_a; ++i)
    for (Index j = 0; j < d_a; ++j) h_ab(i * d_a + i, j * d_a + j) = Complex(0.0, gm(i, j));
  ComplexMatrix h = build_structured_hamiltonian(h_ab, d_ap, d_ap);
  return {qcore::PureState::normalized(d_ap * d_a, d_a * d_ap, std::move(amps)), std::move(h),
          std::move(h_ab)};
}

/// Finite-difference entanglement rate of the assembled system; agrees with
/// ancilla_objective when the factor conventions are right.
inline double assemble_and_arbitrate(const AncillaCoeffs& coeffs, const GBlock& g,
                                     const oracle::FDConfig& cfg = {1e-5, oracle::FdScheme::richardson,
                                                                    LogBase::nat},
                                     Index dim_cap = 4096) {
  const AssembledSystem sys = assemble(coeffs, g, dim_cap);
  return oracle::fd_rate(sys.psi, sys.hamiltonian, cfg);
}

// ---------------------------------------------------------------------------
// Search over C.

struct AnnealStage {
  double regularization;  // eps
  double floor;           // delta
};

struct SupOptions {
  int starts = 6;
  std::uint64_t seed = 0;
  int max_iter = 400;  // per anneal stage and start
  double fd_step = 1e-6;
  std::vector<AnnealStage> schedule{{1e-4, 1e-4}, {1e-6, 1e-6}, {1e-8, 1e-8}, {1e-10, 1e-8}};
  bool arbitrate = true;
  Index dim_cap = 4096;
};

struct StartRecord {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct AncillaOptimum {
  double value = 0.0;    // best achievable rate found (nats)
  double lambda1 = 0.0;  // value / 2
  AncillaCoeffs c_star = AncillaCoeffs(RealMatrix::Ones(1, 1));
  GBlock g_star = GBlock::zero(1);
  int starts = 0;
  double converged_fraction = 0.0;
  double regularization = 0.0;
  double floor = 0.0;
  // 2 sqrt(lambda_sq(C_star, eps)); upper bound that ignores antisymmetry of G.
  double unconstrained_bound = 0.0;
  double arbitrated_rate = std::numeric_limits<double>::quiet_NaN();
  std::vector<StartRecord> start_records;
  std::vector<AnnealStage> schedule;
};

namespace detail {

inline double value_at(const RealMatrix& x, const AnnealStage& st) {
  return fixed_c_optimum(AncillaCoeffs::normalized(x, st.floor), st.regularization).value;
}

inline RealMatrix project(RealMatrix x, double floor) {
  x = x.cwiseMax(floor);
  return x / x.norm();
}

}  // namespace detail

/// Multi-start projected gradient ascent over C (entries >= delta, unit
/// Frobenius norm) of the fixed-C optimum, with (eps, delta) annealed along
/// `schedule`. Start 0 embeds the no-ancilla optimum in the first row; the
/// others are random. Gradients are central differences.
inline AncillaOptimum sup_search(Index d_a, Index d_ap, const SupOptions& opt = {}) {
  if (d_a < 2) throw DimensionError("sup_search: d_A must be >= 2");
  if (d_ap < 1) throw DimensionError("sup_search: d_A' must be >= 1");
  if (opt.starts < 1) throw ValidationError("sup_search: starts must be >= 1");
  if (opt.schedule.empty()) throw ValidationError("sup_search: empty anneal schedule");

  const AnnealStage last = opt.schedule.back();
  AncillaOptimum out;
  out.starts = opt.starts;
  out.schedule = opt.schedule;
  out.regularization = last.regularization;
  out.floor = last.floor;

  double best = -std::numeric_limits<double>::infinity();
  RealMatrix best_x;
  int converged = 0;
  for (int s = 0; s < opt.starts; ++s) {
    RealMatrix x(d_ap, d_a);
    if (s == 0) {
      const auto g = optimum::optimal_gamma(d_a);
      x.setConstant(opt.schedule.front().floor);
      x(0, 0) = std::sqrt(g.gamma);
      for (Index j = 1; j < d_a; ++j) x(0, j) = std::sqrt((1.0 - g.gamma) / static_cast<double>(d_a - 1));
    } else {
      auto rng = qcore::make_engine(opt.seed, static_cast<std::uint64_t>(s));
      std::normal_distribution<double> n01(0.0, 1.0);
      for (Index i = 0; i < x.size(); ++i) x.data()[i] = std::abs(n01(rng));
    }

    StartRecord rec;
    double f = 0.0;
    bool stage_converged = false;
    for (const AnnealStage& st : opt.schedule) {
      x = detail::project(x, st.floor);
      f = detail::value_at(x, st);
      double step = 0.1;
      stage_converged = false;
      int stall = 0;
      for (int it = 0; it < opt.max_iter; ++it, ++rec.iterations) {
        RealMatrix grad(x.rows(), x.cols());
        for (Index i = 0; i < x.size(); ++i) {
          RealMatrix xp = x;
          RealMatrix xm = x;
          xp.data()[i] += opt.fd_step;
          xm.data()[i] = std::max(xm.data()[i] - opt.fd_step, 0.0);
          grad.data()[i] = (detail::value_at(xp, st) - detail::value_at(xm, st)) /
                           (xp.data()[i] - xm.data()[i]);
        }
        // Drop the radial component (the objective is scale invariant) and
        // directions blocked by the floor.
        grad -= (grad.cwiseProduct(x).sum()) * x;
        for (Index i = 0; i < x.size(); ++i)
          if (x.data()[i] <= st.floor && grad.data()[i] < 0.0) grad.data()[i] = 0.0;
        const double gnorm = grad.norm();
        if (gnorm < 1e-9) {
          stage_converged = true;
          break;
        }
        bool accepted = false;
        while (step > 1e-14) {
          const RealMatrix trial = detail::project(x + step * grad / gnorm, st.floor);
          const double ft = detail::value_at(trial, st);
          if (ft > f) {
            const double gain = ft - f;
            x = trial;
            f = ft;
            step = std::min(step * 2.0, 1.0);
            accepted = true;
            stall = gain < 1e-13 ? stall + 1 : 0;
            break;
          }
          step *= 0.5;
        }
        if (!accepted || stall >= 10) {
          stage_converged = true;
          break;
        }
      }
    }
    rec.value = f;
    rec.converged = stage_converged;
    if (stage_converged) ++converged;
    out.start_records.push_back(rec);
    if (f > best) {  // strict: ties keep the lowest start index
      best = f;
      best_x = x;
    }
  }

  out.c_star = AncillaCoeffs::normalized(best_x, last.floor);
  const FixedCOptimum fin = fixed_c_optimum(out.c_star, last.regularization);
  out.value = fin.value;
  out.lambda1 = 0.5 * fin.value;
  out.g_star = fin.g;
  out.converged_fraction = static_cast<double>(converged) / opt.starts;
  out.unconstrained_bound = 2.0 * std::sqrt(lambda_sq(out.c_star, last.regularization));
  if (opt.arbitrate && d_ap * d_ap * d_a * d_a <= opt.dim_cap) {
    out.arbitrated_rate = assemble_and_arbitrate(out.c_star, out.g_star, {1e-5, oracle::FdScheme::richardson,
                                                                          LogBase::nat},
                                                 opt.dim_cap);
  }
  return out;
}

}  // namespace entrate::ancilla
