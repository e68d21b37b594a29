#pragma once

// Run configuration: a flat key=value text file ('#' starts a comment).
// Every key has a default, so an empty file is a valid configuration; any
// key outside the schema is rejected with a file:line anchored message.
// The full schema with defaults is listed in the README and in
// configs/defaults.cfg.

#include <stdexcept>
#include <string>

#include "ringbif/equilibria.hpp"

namespace ringbif {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { satellite, nbody };
const char* to_string(ProblemKind kind);

struct RunConfig {
  ProblemKind problem = ProblemKind::nbody;
  int n = 3;
  double mu = 1.0;

  // Frequency scan window; nu_max = 0 means the mass-derived upper bound.
  double nu_min = 1e-3;
  double nu_max = 0.0;
  double nu_step = 1e-3;
  double refine_tol = 1e-10;

  // Continuation.
  int L = 0;  // 0 picks the family default: 16 satellite, 12 n-body
  double newton_tol = 1e-10;
  double eps0 = 1e-3;
  double h0 = 0.02;
  int steps = 40;
  int event = 0;

  // Verification.
  double dt = 1e-3;
  double closure_dt = 1e-4;
  unsigned seed = 12345;

  // Equilibrium search grid (satellite problems).
  GridSpec grid;

  // Optional mu sweep for bifurcation diagrams (scan command, n-body);
  // count = 0 disables, otherwise a log-spaced grid on [min, max].
  double mu_sweep_min = 0.1;
  double mu_sweep_max = 10.0;
  int mu_sweep_count = 0;

  std::string out = "runs";
};

// Parses and validates; throws ConfigError with "<path>:<line>: ..." for
// syntax/unknown-key/value problems and "<path>: ..." for semantic ones.
RunConfig load_config(const std::string& path);

// Semantic checks shared by load_config and tests.
void validate(const RunConfig& cfg, const std::string& path = "<config>");

// Effective mode truncation for the configured problem family.
int effective_L(const RunConfig& cfg);

}  // namespace ringbif
