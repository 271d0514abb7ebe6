#pragma once

#include "stlmpc/qp_problem.hpp"

namespace stlmpc {

struct SolverSettings {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  int max_iterations = 50000;
  // Relative threshold for accepting an infeasibility certificate built from
  // the divergence direction of the iterates.
  double eps_infeasible = 1e-5;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int scaling_iterations = 10;
  int check_interval = 25;
  bool adaptive_rho = true;
  bool polish = true;
};

// Operator splitting (ADMM) on the equilibrated problem with active-set
// polishing. Throws std::invalid_argument when P is not symmetric PSD.
QpSolution solve(const QpProblem& problem, const SolverSettings& settings = {});

}  // namespace stlmpc
