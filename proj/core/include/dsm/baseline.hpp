#pragma once

#include "dsm/osa.hpp"

namespace dsm {

/// First-order comparison baseline: gradient descent on J(alpha) with
/// Armijo backtracking. Deliberately not a second-order method; compare
/// reports label it "GD-Armijo baseline".
struct BaselineOptions {
  int max_iterations = 50;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  double grad_tol = 1e-10;

  void validate() const;
};

SolveReport solve_gd(const SnapshotProblem& problem, const BaselineOptions& options = {});

}  // namespace dsm
