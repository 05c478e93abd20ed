// Two-qubit walk-through: the rate of a fixed state/Hamiltonian pair, its
// finite-difference check, the best rate for that state, and the best rate
// over all two-qubit states.

#include <cmath>
#include <cstdio>

#include "entrate/optimum.hpp"
#include "entrate/oracle.hpp"
#include "entrate/rate.hpp"

int main() {
  using namespace entrate;

  RealVector c(2);
  c << std::sqrt(0.9), std::sqrt(0.1);
  const qcore::SchmidtState state = qcore::SchmidtState::from_coefficients(c, 2, 2);

  RealMatrix m_imag(2, 2);
  m_imag << 0.0, -1.0, 1.0, 0.0;
  const rate::SchmidtBlock block = rate::SchmidtBlock::from_imaginary(m_imag);
  const ComplexMatrix h = rate::embed_schmidt_block(state, block);
  const qcore::PureState psi = state.to_pure_state();

  const double closed = rate::gamma_rate(state, block);
  const double fd = oracle::fd_rate(psi, h, {1e-5, oracle::FdScheme::richardson, LogBase::nat});
  const auto stats = rate::energy_stats(psi, h);
  std::printf("state C = (sqrt(0.9), sqrt(0.1)), Im M = [[0,-1],[1,0]]\n");
  std::printf("  closed-form rate      %.12f nats\n", closed);
  std::printf("  finite-difference     %.12f nats\n", fd);
  std::printf("  energy variance       %.12f (real part %.3g, imaginary part %.12f)\n", stats.variance,
              stats.variance_real_part, stats.variance_imag_part);

  const auto sol = optimum::lagrange_solve(state);
  std::printf("  best rate for this state, 2 sqrt(f(p)) = %.12f nats (lambda1 = %.6f)\n",
              optimum::max_rate(state), sol.lambda1);

  const auto best = optimum::optimal_gamma(2);
  const auto design = optimum::build_optimal_design(best.gamma, 2);
  const double design_fd = oracle::fd_rate(design.state.to_pure_state(), design.hamiltonian,
                                           {1e-5, oracle::FdScheme::richardson, LogBase::nat});
  std::printf("best over all two-qubit states\n");
  std::printf("  gamma* = %.10f\n", best.gamma);
  std::printf("  rate   = %.12f nats = %.12f bits\n", best.rate, to_base(best.rate, LogBase::bits));
  std::printf("  finite-difference check of the optimal design: %.12f nats\n", design_fd);
  return 0;
}
