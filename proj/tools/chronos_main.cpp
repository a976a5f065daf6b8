#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "chronos/cli.hpp"

namespace {

void add_common_options(CLI::App* cmd, chronos::cli::RunConfig& cfg) {
  static const std::map<std::string, chronos::ConsistencyMode> modes{
      {"weak", chronos::ConsistencyMode::Weak},
      {"strong", chronos::ConsistencyMode::Strong},
      {"rho", chronos::ConsistencyMode::Rho},
      {"rho-rho", chronos::ConsistencyMode::RhoRho},
  };
  cmd->add_option("input", cfg.input, "scenario file path or corpus:NAME")->required();
  cmd->add_flag("--json", cfg.json, "machine-readable output");
  cmd->add_option("--mode", cfg.mode, "consistency mode")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->default_str("strong");
  cmd->add_option("--tol", cfg.tol, "structural tolerance")->envname("CHRONOS_TOL");
  cmd->add_option("--tol-prob", cfg.tol_prob, "probability band for true/false verdicts");
  cmd->add_option("--rho", cfg.rho_name, "projector backing the initial density matrix");
  cmd->add_option("--rho2", cfg.rho_prime_name, "projector backing the final density matrix");
  cmd->add_option("--max-dim", cfg.max_dim, "largest accepted space dimension");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chronos: a reasoning engine for consistent histories of closed quantum systems"};
  app.require_subcommand(1);

  chronos::cli::RunConfig run_cfg;
  CLI::App* run = app.add_subcommand("run", "execute a scenario's queries");
  add_common_options(run, run_cfg);

  chronos::cli::RunConfig check_cfg;
  CLI::App* check = app.add_subcommand("check", "report framework consistency only");
  add_common_options(check, check_cfg);

  bool corpus_json = false;
  CLI::App* corpus = app.add_subcommand("corpus", "bundled scenarios");
  CLI::App* corpus_list = corpus->add_subcommand("list", "list the bundled scenarios");
  corpus_list->add_flag("--json", corpus_json, "machine-readable output");
  corpus->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return chronos::cli::run_command(run_cfg, std::cout, std::cerr);
  if (check->parsed()) return chronos::cli::check_command(check_cfg, std::cout, std::cerr);
  if (corpus->parsed() && corpus_list->parsed())
    return chronos::cli::corpus_list_command(corpus_json, std::cout);
  return chronos::cli::kExitError;
}
