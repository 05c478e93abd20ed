#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "entrate/cli.hpp"

int main(int argc, char** argv) {
  using entrate::cli::Format;
  using entrate::cli::RunConfig;

  RunConfig cfg;
  cfg.dim_cap = entrate::ancilla::dim_cap_from_env();
  long long dim_a = 2;
  long long dim_b = 0;
  long long anc = 0;
  std::string log_base = "nat";
  std::string format;

  CLI::App app{"Entanglement generation rates under an energy-variance budget"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--dim", dim_a, "d_A (and d_B unless --dim-b is given)")->check(CLI::PositiveNumber);
  app.add_option("--dim-b", dim_b, "d_B")->check(CLI::PositiveNumber);
  app.add_option("--ancilla", anc, "ancilla dimension d_A' (d_B' = d_A')")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--log-base", log_base, "base of reported rates")->check(CLI::IsMember({"nat", "2"}));
  app.add_option("--tol", cfg.tol, "pass/fail tolerance against the oracle (nats)");
  app.add_option("--starts", cfg.starts, "multi-start count");
  app.add_option("--max-iter", cfg.max_iter, "iterations per start and anneal stage");
  app.add_option("--fd-step", cfg.fd_step, "finite-difference step");
  app.add_option("--out", cfg.out_path, "write the report here instead of stdout");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  CLI::App* rate = app.add_subcommand("rate", "closed-form rate of a state/Hamiltonian pair vs the oracle");
  rate->add_option("--state", cfg.state_path, "state JSON (d_A x d_B amplitude matrix)")->required();
  rate->add_option("--hamiltonian", cfg.hamiltonian_path, "Hamiltonian JSON")->required();

  app.add_subcommand("optimize", "optimal rate, state and Hamiltonian (with --ancilla: ancilla search)");

  CLI::App* sweep = app.add_subcommand("sweep", "CSV sweeps over gamma or dimension");
  sweep->add_option("--gamma-grid", cfg.gamma_grid, "number of interior gamma points");
  sweep->add_option("--dim-range", cfg.dim_range, "dimension range a..b");

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite on random instances");
  verify->add_option("--trials", cfg.trials, "instances per check");
  verify->add_flag("--inject-sign-flip", cfg.inject_sign_flip, "negate the closed form (mutation test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : entrate::cli::kExitInput;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  cfg.d_a = static_cast<entrate::Index>(dim_a);
  if (dim_b > 0) cfg.d_b = static_cast<entrate::Index>(dim_b);
  if (anc > 0) cfg.d_ancilla = static_cast<entrate::Index>(anc);
  cfg.log_base = log_base == "2" ? entrate::LogBase::bits : entrate::LogBase::nat;
  if (format == "json") cfg.format = Format::json;
  if (format == "csv") cfg.format = Format::csv;
  return entrate::cli::run(cfg, std::cout, std::cerr);
}
