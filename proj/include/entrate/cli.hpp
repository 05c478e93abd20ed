#pragma once

// Command implementations behind the `entrate` executable. Each command
// writes its report to `out` (or to RunConfig::out_path) and returns the
// process exit code: 0 pass, 1 numeric failure, 2 input failure.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "entrate/ancilla.hpp"
#include "entrate/io.hpp"
#include "entrate/optimum.hpp"
#include "entrate/oracle.hpp"
#include "entrate/rate.hpp"

namespace entrate::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitInput = 2;

enum class Format { json, csv };

struct RunConfig {
  std::string command;
  Index d_a = 2;
  std::optional<Index> d_b;        // defaults to d_a
  std::optional<Index> d_ancilla;  // d_A' (d_B' is tied to it)
  std::uint64_t seed = 0;
  LogBase log_base = LogBase::nat;
  double tol = 2e-6;
  int starts = 8;
  int max_iter = 400;
  double fd_step = 1e-5;
  std::string out_path;
  std::optional<Format> format;
  Index dim_cap = 4096;

  // rate
  std::string state_path;
  std::string hamiltonian_path;
  // sweep
  std::string dim_range;
  int gamma_grid = 0;
  // verify
  int trials = 20;
  bool inject_sign_flip = false;

  Index dim_b() const { return d_b.value_or(d_a); }

  Format format_or(Format fallback) const { return format.value_or(fallback); }

  void validate() const {
    if (d_a < 1 || dim_b() < 1) throw DimensionError("dimensions must be >= 1");
    if (d_ancilla && *d_ancilla < 1) throw DimensionError("--ancilla must be >= 1");
    if (starts < 1) throw ValidationError("--starts must be >= 1");
    if (max_iter < 1) throw ValidationError("--max-iter must be >= 1");
    if (!(tol > 0.0)) throw ValidationError("--tol must be > 0");
    if (trials < 1) throw ValidationError("--trials must be >= 1");
    if (dim_cap < 1) throw ValidationError("dimension cap must be >= 1");
    oracle::FDConfig{fd_step, oracle::FdScheme::richardson, LogBase::nat}.validate();
  }

  void require_within_cap(Index product, const char* what) const {
    if (product > dim_cap) {
      throw DimensionError(std::string(what) + ": product dimension " + std::to_string(product) +
                           " exceeds cap " + std::to_string(dim_cap) + " (set ENTRATE_DIM_CAP to raise it)");
    }
  }

  oracle::FDConfig fd_config() const { return {fd_step, oracle::FdScheme::richardson, LogBase::nat}; }
};

inline std::string log_base_name(LogBase b) { return b == LogBase::nat ? "nat" : "2"; }

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Adds name (in the configured base), name_nat and name_bits.
inline void put_rate(io::json& j, const std::string& name, double nats, LogBase base) {
  j[name] = to_base(nats, base);
  j[name + "_nat"] = nats;
  j[name + "_bits"] = to_base(nats, LogBase::bits);
}

/// Flat key,value CSV of the scalar members of a JSON object.
inline std::string scalars_to_csv(const io::json& j) {
  std::ostringstream s;
  s << "quantity,value\n";
  for (const auto& [key, value] : j.items()) {
    if (value.is_number_float()) {
      s << key << ',' << format_double(value.get<double>()) << '\n';
    } else if (value.is_number() || value.is_boolean()) {
      s << key << ',' << value.dump() << '\n';
    } else if (value.is_string()) {
      s << key << ',' << value.get<std::string>() << '\n';
    }
  }
  return s.str();
}

inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out_path.empty()) {
    out << text;
  } else {
    io::write_text_file(cfg.out_path, text);
  }
}

inline void emit_json_or_csv(const RunConfig& cfg, std::ostream& out, const io::json& report) {
  emit(cfg, out, cfg.format_or(Format::json) == Format::json ? report.dump(2) + "\n" : scalars_to_csv(report));
}

// ---------------------------------------------------------------------------
// rate

inline int cmd_rate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.state_path.empty() || cfg.hamiltonian_path.empty()) {
    throw ValidationError("rate: --state and --hamiltonian are required");
  }
  const qcore::PureState psi = io::read_state_file(cfg.state_path);
  const ComplexMatrix h = io::read_matrix_file(cfg.hamiltonian_path);
  cfg.require_within_cap(psi.dim(), "rate");
  if (h.rows() != psi.dim() || h.cols() != psi.dim()) {
    throw DimensionError("rate: Hamiltonian is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                         ", state needs " + std::to_string(psi.dim()));
  }
  qcore::require_hermitian(h, "rate");

  const qcore::SchmidtState state = qcore::schmidt_decompose(psi);
  const double gamma = rate::gamma_rate(state, rate::schmidt_block(h, state));
  const oracle::FdReport fd = oracle::fd_rate_report(psi, h, cfg.fd_config());
  const rate::EnergyStats stats = rate::energy_stats(psi, h);
  const oracle::DirectStats direct = oracle::direct_stats(psi, h);
  const double diff = gamma - fd.rate;
  const bool pass = std::abs(diff) < cfg.tol;

  io::json report{{"command", "rate"}, {"d_A", psi.d_a()}, {"d_B", psi.d_b()}, {"log_base", log_base_name(cfg.log_base)}};
  put_rate(report, "gamma", gamma, cfg.log_base);
  put_rate(report, "fd_rate", fd.rate, cfg.log_base);
  report["difference_nat"] = diff;
  report["tolerance"] = cfg.tol;
  report["fd_step"] = fd.step;
  report["fd_scheme"] = oracle::to_string(fd.scheme);
  report["fd_truncation_estimate"] = fd.truncation_estimate;
  report["mean"] = stats.mean;
  report["variance"] = stats.variance;
  report["variance_real_part"] = stats.variance_real_part;
  report["variance_imag_part"] = stats.variance_imag_part;
  report["direct_mean"] = direct.mean;
  report["direct_variance"] = direct.variance;
  report["pass"] = pass;
  emit_json_or_csv(cfg, out, report);
  if (!pass) err << "rate: closed form and oracle differ by " << format_double(diff) << " (tolerance " << cfg.tol << ")\n";
  return pass ? kExitPass : kExitNumeric;
}

// ---------------------------------------------------------------------------
// optimize

/// Optimal no-ancilla design on d_A x d_B (Schmidt rank min(d_A, d_B)).
struct PlacedDesign {
  optimum::GammaOptimum gamma;
  qcore::SchmidtState state;
  ComplexMatrix hamiltonian;
  double rate;
};

inline PlacedDesign place_optimal_design(Index d_a, Index d_b) {
  const Index d = std::min(d_a, d_b);
  if (d < 2) throw DimensionError("optimize: min(d_A, d_B) must be >= 2");
  const optimum::GammaOptimum g = optimum::optimal_gamma(d);
  const optimum::OptimalDesign design = optimum::build_optimal_design(g.gamma, d);
  const rate::SchmidtBlock block = rate::schmidt_block(design.hamiltonian, design.state);
  qcore::SchmidtState state = qcore::SchmidtState::from_coefficients(design.state.coefficients(), d_a, d_b);
  ComplexMatrix h = rate::embed_schmidt_block(state, block);
  const double r = rate::gamma_rate(state, rate::schmidt_block(h, state));
  return {g, std::move(state), std::move(h), r};
}

inline std::string sibling_path(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  const std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? path.substr(0, dot) : path;
  return stem + suffix;
}

inline int cmd_optimize_ancilla(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Index d_a = cfg.d_a;
  const Index d_ap = *cfg.d_ancilla;
  if (cfg.d_b && *cfg.d_b != d_a) throw DimensionError("optimize --ancilla: requires d_B == d_A");
  if (d_a < 2) throw DimensionError("optimize --ancilla: d_A must be >= 2");
  cfg.require_within_cap(d_ap * d_a * d_a * d_ap, "optimize --ancilla");

  ancilla::SupOptions opt;
  opt.starts = cfg.starts;
  opt.seed = cfg.seed;
  opt.max_iter = cfg.max_iter;
  opt.dim_cap = cfg.dim_cap;
  const ancilla::AncillaOptimum res = ancilla::sup_search(d_a, d_ap, opt);
  const bool pass = std::isfinite(res.arbitrated_rate) && std::abs(res.arbitrated_rate - res.value) < cfg.tol;

  io::json report{{"command", "optimize"}, {"mode", "ancilla"}, {"log_base", log_base_name(cfg.log_base)}};
  put_rate(report, "rate", res.value, cfg.log_base);
  report["optimum"] = io::to_json(res);
  report["tolerance"] = cfg.tol;
  report["pass"] = pass;
  if (cfg.format_or(Format::json) == Format::csv) {
    std::ostringstream s;
    s << "d_A,d_A',value_nat,value_bits,lambda1,converged_fraction\n"
      << d_a << ',' << d_ap << ',' << format_double(res.value) << ','
      << format_double(to_base(res.value, LogBase::bits)) << ',' << format_double(res.lambda1) << ','
      << format_double(res.converged_fraction) << '\n';
    emit(cfg, out, s.str());
  } else {
    emit(cfg, out, report.dump(2) + "\n");
  }
  if (!pass) err << "optimize: finite-difference arbitration disagrees with the reported value\n";
  return pass ? kExitPass : kExitNumeric;
}

inline int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.d_ancilla) return cmd_optimize_ancilla(cfg, out, err);
  const Index d_a = cfg.d_a;
  const Index d_b = cfg.dim_b();
  cfg.require_within_cap(d_a * d_b, "optimize");
  const PlacedDesign design = place_optimal_design(d_a, d_b);
  const qcore::PureState psi = design.state.to_pure_state();
  const double fd = oracle::fd_rate(psi, design.hamiltonian, cfg.fd_config());
  const oracle::DirectStats stats = oracle::direct_stats(psi, design.hamiltonian);
  const bool pass = std::abs(fd - design.rate) < cfg.tol && std::abs(stats.variance - 1.0) < 1e-8 &&
                    std::abs(design.rate - design.gamma.rate) < 1e-9;

  io::json report{{"command", "optimize"},
                  {"mode", "no_ancilla"},
                  {"d_A", d_a},
                  {"d_B", d_b},
                  {"d", std::min(d_a, d_b)},
                  {"log_base", log_base_name(cfg.log_base)},
                  {"gamma_star", design.gamma.gamma}};
  put_rate(report, "rate", design.gamma.rate, cfg.log_base);
  put_rate(report, "design_rate", design.rate, cfg.log_base);
  put_rate(report, "fd_rate", fd, cfg.log_base);
  report["energy_mean"] = stats.mean;
  report["energy_variance"] = stats.variance;
  report["tolerance"] = cfg.tol;
  report["pass"] = pass;

  if (cfg.out_path.empty()) {
    report["state"] = io::state_to_json(psi);
    report["hamiltonian"] = io::matrix_to_json(design.hamiltonian);
  } else {
    const std::string state_file = sibling_path(cfg.out_path, ".state.json");
    const std::string ham_file = sibling_path(cfg.out_path, ".hamiltonian.json");
    io::write_text_file(state_file, io::state_to_json(psi).dump(2) + "\n");
    io::write_text_file(ham_file, io::matrix_to_json(design.hamiltonian).dump(2) + "\n");
    report["state_file"] = state_file;
    report["hamiltonian_file"] = ham_file;
  }
  emit_json_or_csv(cfg, out, report);
  if (!pass) err << "optimize: design failed its oracle check\n";
  return pass ? kExitPass : kExitNumeric;
}

// ---------------------------------------------------------------------------
// sweep

inline std::pair<Index, Index> parse_range(const std::string& text) {
  const auto sep = text.find("..");
  if (sep == std::string::npos) throw ValidationError("range must look like a..b, got '" + text + "'");
  std::size_t used_a = 0;
  std::size_t used_b = 0;
  long long a = 0;
  long long b = 0;
  const std::string left = text.substr(0, sep);
  const std::string right = text.substr(sep + 2);
  try {
    a = std::stoll(left, &used_a);
    b = std::stoll(right, &used_b);
  } catch (const std::exception&) {
    throw ValidationError("range must look like a..b, got '" + text + "'");
  }
  if (used_a != left.size() || used_b != right.size()) {
    throw ValidationError("range must look like a..b, got '" + text + "'");
  }
  if (a > b) throw ValidationError("empty range '" + text + "'");
  return {static_cast<Index>(a), static_cast<Index>(b)};
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::ostringstream s;
    for (std::size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
    s << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
      s << '\n';
    }
    return s.str();
  }

  io::json json_rows() const {
    io::json a = io::json::array();
    for (const auto& r : rows) {
      io::json o = io::json::object();
      for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = io::json::parse(r[i]);
      a.push_back(std::move(o));
    }
    return a;
  }
};

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const bool grid = cfg.gamma_grid != 0;
  const bool range = !cfg.dim_range.empty();
  if (grid == range) throw ValidationError("sweep: give exactly one of --gamma-grid or --dim-range");
  Table t;
  if (grid) {
    if (cfg.gamma_grid < 1) throw ValidationError("sweep: --gamma-grid must be >= 1");
    if (cfg.d_a < 2) throw DimensionError("sweep: --dim must be >= 2");
    t.header = {"param", "rate_nat", "rate_bits"};
    for (const auto& [g, r] : optimum::gamma_curve(cfg.d_a, cfg.gamma_grid)) {
      t.rows.push_back({format_double(g), format_double(r), format_double(to_base(r, LogBase::bits))});
    }
  } else {
    const auto [lo, hi] = parse_range(cfg.dim_range);
    if (lo < 2) throw DimensionError("sweep: dimensions in --dim-range must be >= 2");
    if (!cfg.d_ancilla) {
      t.header = {"param", "rate_nat", "rate_bits"};
      for (Index d = lo; d <= hi; ++d) {
        const double r = optimum::optimal_gamma(d).rate;
        t.rows.push_back({std::to_string(d), format_double(r), format_double(to_base(r, LogBase::bits))});
      }
    } else {
      t.header = {"d_A", "d_A'", "value_nat", "value_bits", "lambda1", "converged_fraction"};
      for (Index d = lo; d <= hi; ++d) {
        for (Index dap = 1; dap <= *cfg.d_ancilla; ++dap) {
          cfg.require_within_cap(dap * d * d * dap, "sweep");
          ancilla::SupOptions opt;
          opt.starts = cfg.starts;
          opt.seed = cfg.seed;
          opt.max_iter = cfg.max_iter;
          opt.arbitrate = false;
          const auto res = ancilla::sup_search(d, dap, opt);
          t.rows.push_back({std::to_string(d), std::to_string(dap), format_double(res.value),
                            format_double(to_base(res.value, LogBase::bits)), format_double(res.lambda1),
                            format_double(res.converged_fraction)});
        }
      }
    }
  }
  emit(cfg, out, cfg.format_or(Format::csv) == Format::csv ? t.csv() : t.json_rows().dump(2) + "\n");
  return kExitPass;
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
  std::string name;
  int passed = 0;
  int total = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> failures;

  bool ok() const { return passed == total; }

  void record(double error, const std::string& label) {
    ++total;
    max_error = std::max(max_error, std::isfinite(error) ? error : std::numeric_limits<double>::infinity());
    if (error <= tolerance) {
      ++passed;
    } else {
      failures.push_back(label + ": error " + format_double(error));
    }
  }
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int trials = 20;
  double fd_tolerance = 2e-6;
  double fd_step = 1e-5;
  bool inject_sign_flip = false;
};

/// Runs every cross-module invariant on `trials` random instances per check.
inline std::vector<CheckResult> run_verify_suite(const VerifyOptions& o) {
  std::vector<CheckResult> results;
  const oracle::FDConfig fd_cfg{o.fd_step, oracle::FdScheme::richardson, LogBase::nat};
  const auto engine = [&](std::uint64_t check, int trial) {
    return qcore::make_engine(o.seed, check * 1000003ull + static_cast<std::uint64_t>(trial));
  };
  const auto dims = [](std::mt19937_64& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
  };
  const auto label = [](int trial, Index a, Index b) {
    return "trial " + std::to_string(trial) + " (" + std::to_string(a) + "x" + std::to_string(b) + ")";
  };

  {
    CheckResult r{"rate_vs_oracle", 0, 0, 0.0, o.fd_tolerance, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(1, t);
      const Index da = dims(rng, 2, 4);
      const Index db = dims(rng, 2, 4);
      const auto psi = qcore::random_state(da, db, rng);
      const ComplexMatrix h = qcore::random_hermitian(da * db, rng);
      const auto st = qcore::schmidt_decompose(psi);
      double g = rate::gamma_rate(st, rate::schmidt_block(h, st));
      if (o.inject_sign_flip) g = -g;
      r.record(std::abs(g - oracle::fd_rate(psi, h, fd_cfg)), label(t, da, db));
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"variance_split", 0, 0, 0.0, 1e-9, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(2, t);
      const Index da = dims(rng, 2, 5);
      const Index db = dims(rng, 2, 5);
      const auto psi = qcore::random_state(da, db, rng);
      const ComplexMatrix h = qcore::random_hermitian(da * db, rng);
      const auto s = rate::energy_stats(psi, h);
      const auto d = oracle::direct_stats(psi, h);
      double e = std::abs(s.variance - (s.variance_real_part + s.variance_imag_part));
      e = std::max(e, std::abs(s.variance - d.variance));
      if (s.variance_real_part < -1e-12 || s.variance_imag_part < -1e-12) e = std::numeric_limits<double>::infinity();
      r.record(e, label(t, da, db));
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"mean_energy", 0, 0, 0.0, 1e-10, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(3, t);
      const Index da = dims(rng, 2, 5);
      const Index db = dims(rng, 2, 5);
      const auto psi = qcore::random_state(da, db, rng);
      const ComplexMatrix h = qcore::random_hermitian(da * db, rng);
      const auto st = qcore::schmidt_decompose(psi);
      r.record(std::abs(rate::mean_energy(st, rate::schmidt_block(h, st)) - oracle::direct_stats(psi, h).mean),
               label(t, da, db));
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"lagrange_optimum", 0, 0, 0.0, 1e-6, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(4, t);
      const Index d = dims(rng, 2, 6);
      const auto st = qcore::schmidt_decompose(qcore::random_state(d, d, rng));
      const double closed = optimum::max_rate(st);
      const auto sol = optimum::lagrange_solve(st);
      const double brute = optimum::brute_force_max_k(st, 4, o.seed + static_cast<std::uint64_t>(t));
      const auto ach = optimum::achieving_hamiltonian(st, sol.k);
      const auto stats = rate::energy_stats(st.to_pure_state(), ach.hamiltonian);
      const double achieved = rate::gamma_rate(st, rate::schmidt_block(ach.hamiltonian, st));
      double e = std::abs(closed - brute);
      e = std::max(e, std::abs(closed - sol.max_rate));
      e = std::max(e, std::abs(closed - achieved));
      e = std::max(e, std::abs(stats.variance_imag_part - 1.0));
      r.record(e, label(t, d, d));
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"local_unitary_invariance", 0, 0, 0.0, 1e-9, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(5, t);
      const Index da = dims(rng, 2, 4);
      const Index db = dims(rng, 2, 4);
      const auto psi = qcore::random_state(da, db, rng);
      const ComplexMatrix h = qcore::random_hermitian(da * db, rng);
      const ComplexMatrix u = Eigen::kroneckerProduct(qcore::random_unitary(da, rng), qcore::random_unitary(db, rng)).eval();
      const qcore::PureState moved(da, db, u * psi.amplitudes());
      const ComplexMatrix h_moved = u * h * u.adjoint();
      const auto s0 = qcore::schmidt_decompose(psi);
      const auto s1 = qcore::schmidt_decompose(moved);
      r.record(std::abs(rate::gamma_rate(s0, rate::schmidt_block(h, s0)) -
                        rate::gamma_rate(s1, rate::schmidt_block(0.5 * (h_moved + h_moved.adjoint()), s1))),
               label(t, da, db));
    }
    results.push_back(std::move(r));
  }
  const auto random_coeffs = [](std::mt19937_64& rng, Index rows, Index cols) {
    std::uniform_real_distribution<double> u01(0.05, 1.0);
    RealMatrix c(rows, cols);
    for (Index i = 0; i < c.size(); ++i) c.data()[i] = u01(rng);
    return ancilla::AncillaCoeffs::normalized(c);
  };
  const auto random_g = [](std::mt19937_64& rng, Index d) {
    std::normal_distribution<double> n01(0.0, 1.0);
    RealVector u(d * (d - 1) / 2);
    for (Index i = 0; i < u.size(); ++i) u(i) = n01(rng);
    return ancilla::GBlock(d, u);
  };
  {
    CheckResult r{"ancilla_identities", 0, 0, 0.0, 1e-12, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(6, t);
      const Index dap = dims(rng, 1, 4);
      const Index da = dims(rng, 2, 4);
      const auto c = random_coeffs(rng, dap, da);
      const auto g = random_g(rng, da);
      const double e = std::max(
          std::abs(ancilla::ancilla_objective(c, g) - ancilla::ancilla_objective_index_form(c, g)),
          std::abs(ancilla::variance_constraint(c, g) - ancilla::variance_constraint_index_form(c, g)));
      r.record(e, label(t, dap, da));
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"ancilla_arbitration", 0, 0, 0.0, o.fd_tolerance, {}};
    for (int t = 0; t < o.trials; ++t) {
      auto rng = engine(7, t);
      const Index dap = dims(rng, 1, 2);
      const Index da = dims(rng, 2, 3);
      const auto c = random_coeffs(rng, dap, da);
      const ancilla::GBlock g0 = random_g(rng, da);
      const double scale = 1.0 / std::sqrt(ancilla::variance_constraint(c, g0));
      const ancilla::GBlock g(da, g0.upper() * scale);
      double obj = ancilla::ancilla_objective(c, g);
      if (o.inject_sign_flip) obj = -obj;
      r.record(std::abs(obj - ancilla::assemble_and_arbitrate(c, g, fd_cfg)), label(t, dap, da));
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"optimal_design", 0, 0, 0.0, o.fd_tolerance, {}};
    for (Index d = 2; d <= 4; ++d) {
      const PlacedDesign design = place_optimal_design(d, d);
      const qcore::PureState psi = design.state.to_pure_state();
      const double fd = oracle::fd_rate(psi, design.hamiltonian, fd_cfg);
      const double var = oracle::direct_stats(psi, design.hamiltonian).variance;
      r.record(std::max(std::abs(fd - design.gamma.rate), std::abs(var - 1.0)), "d = " + std::to_string(d));
    }
    results.push_back(std::move(r));
  }
  return results;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  VerifyOptions o;
  o.seed = cfg.seed;
  o.trials = cfg.trials;
  o.fd_tolerance = cfg.tol;
  o.fd_step = cfg.fd_step;
  o.inject_sign_flip = cfg.inject_sign_flip;
  const std::vector<CheckResult> results = run_verify_suite(o);
  const bool all_ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.ok(); });

  std::ostringstream text;
  if (cfg.format_or(Format::json) == Format::csv) {
    text << "check,passed,total,max_error,tolerance,status\n";
    for (const auto& r : results) {
      text << r.name << ',' << r.passed << ',' << r.total << ',' << format_double(r.max_error) << ','
           << format_double(r.tolerance) << ',' << (r.ok() ? "PASS" : "FAIL") << '\n';
    }
  } else {
    io::json checks = io::json::array();
    for (const auto& r : results) {
      checks.push_back({{"check", r.name},
                        {"passed", r.passed},
                        {"total", r.total},
                        {"max_error", r.max_error},
                        {"tolerance", r.tolerance},
                        {"status", r.ok() ? "PASS" : "FAIL"},
                        {"failures", r.failures}});
    }
    io::json report{{"command", "verify"},
                    {"seed", cfg.seed},
                    {"trials", cfg.trials},
                    {"sign_flip_injected", cfg.inject_sign_flip},
                    {"checks", std::move(checks)},
                    {"pass", all_ok}};
    text << report.dump(2) << '\n';
  }
  emit(cfg, out, text.str());
  for (const auto& r : results) {
    for (const auto& f : r.failures) err << "verify: " << r.name << " " << f << '\n';
  }
  return all_ok ? kExitPass : kExitNumeric;
}

// ---------------------------------------------------------------------------

/// Validates `cfg`, dispatches on cfg.command and maps exceptions onto the
/// exit-code contract.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    if (cfg.command == "rate") return cmd_rate(cfg, out, err);
    if (cfg.command == "optimize") return cmd_optimize(cfg, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    err << "unknown command '" << cfg.command << "'\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {  // ParseError, ValidationError, DimensionError
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace entrate::cli
