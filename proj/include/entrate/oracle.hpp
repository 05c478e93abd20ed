#pragma once

// Ground truth for the closed forms: the entanglement entropy of
// exp(-iHt)|psi> differentiated numerically at t = 0, and energy moments from
// dense products. Nothing here reads a Schmidt block.

#include <cmath>
#include <string>

#include "entrate/qcore.hpp"

namespace entrate::oracle {

using qcore::PureState;

enum class FdScheme { central, richardson };

struct FDConfig {
  double step = 1e-5;
  FdScheme scheme = FdScheme::central;
  LogBase entropy_log_base = LogBase::nat;

  void validate() const {
    if (!(step >= 1e-8 && step <= 1e-2)) {
      throw ValidationError("FDConfig: step must lie in [1e-8, 1e-2]");
    }
  }
};

struct FdReport {
  double rate = 0.0;
  // |D(h) - D(2h)| / 3 for central differences D, the leading O(h^2)
  // truncation term; Richardson removes it, leaving O(h^4).
  double truncation_estimate = 0.0;
  double step = 0.0;
  FdScheme scheme = FdScheme::central;
};

inline double entropy_at(const PureState& psi, const ComplexMatrix& h, double t, LogBase base) {
  const ComplexVector evolved = qcore::herm_expm(h, t) * psi.amplitudes();
  const ComplexMatrix rho = evolved * evolved.adjoint();
  ComplexMatrix rho_a = qcore::partial_trace_b(rho, psi.d_a(), psi.d_b());
  rho_a = 0.5 * (rho_a + rho_a.adjoint()).eval();
  rho_a /= rho_a.trace().real();
  return qcore::von_neumann_entropy(rho_a, base);
}

inline FdReport fd_rate_report(const PureState& psi, const ComplexMatrix& h, const FDConfig& cfg = {}) {
  cfg.validate();
  if (h.rows() != psi.dim() || h.cols() != psi.dim()) {
    throw DimensionError("fd_rate: Hamiltonian size does not match the state");
  }
  qcore::require_hermitian(h, "fd_rate");
  const double s = cfg.step;
  const auto e = [&](double t) { return entropy_at(psi, h, t, cfg.entropy_log_base); };
  const double d1 = (e(s) - e(-s)) / (2.0 * s);
  const double d2 = (e(2.0 * s) - e(-2.0 * s)) / (4.0 * s);

  FdReport out;
  out.step = s;
  out.scheme = cfg.scheme;
  out.truncation_estimate = std::abs(d1 - d2) / 3.0;
  out.rate = cfg.scheme == FdScheme::central ? d1 : (4.0 * d1 - d2) / 3.0;
  return out;
}

/// dE/dt at t = 0 for E(t) = S(tr_B exp(-iHt)|psi><psi|exp(iHt)).
inline double fd_rate(const PureState& psi, const ComplexMatrix& h, const FDConfig& cfg = {}) {
  return fd_rate_report(psi, h, cfg).rate;
}

struct DirectStats {
  double mean = 0.0;
  double variance = 0.0;
};

inline DirectStats direct_stats(const PureState& psi, const ComplexMatrix& h) {
  if (h.rows() != psi.dim() || h.cols() != psi.dim()) {
    throw DimensionError("direct_stats: Hamiltonian size does not match the state");
  }
  const ComplexVector& v = psi.amplitudes();
  const ComplexVector hv = h * v;
  const double mean = v.dot(hv).real();  // Eigen's dot conjugates the left operand
  const double second = v.dot(h * hv).real();
  return {mean, second - mean * mean};
}

inline std::string to_string(FdScheme s) { return s == FdScheme::central ? "central" : "richardson"; }

}  // namespace entrate::oracle
