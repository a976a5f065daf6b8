#pragma once

#include <iosfwd>
#include <string>

#include "chronos/scenario.hpp"

namespace chronos::cli {

struct RunConfig {
  std::string input;  // scenario file path, or corpus:NAME
  bool json = false;
  ConsistencyMode mode = ConsistencyMode::Strong;
  double tol = kDefaultTol;
  double tol_prob = 1e-9;
  std::string rho_name;        // projector backing rho, scaled to unit trace
  std::string rho_prime_name;  // projector backing rho' (rho-rho mode)
  int max_dim = 64;
};

// Exit codes: 0 = ran to completion (any mix of probability / true / false /
// meaningless verdicts); 1 = parse, elaboration, I/O or query-evaluation
// error; 2 = the initial data is inconsistent.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDataInconsistent = 2;

/// Parses, elaborates and executes every query in declaration order.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Prints a consistency report per declared framework; no queries run.
int check_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Lists the bundled corpus scenarios.
int corpus_list_command(bool json, std::ostream& out);

}  // namespace chronos::cli
