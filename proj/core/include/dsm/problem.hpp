#pragma once

#include <memory>
#include <vector>

#include "dsm/dynamics.hpp"

namespace dsm {

/// The full matching instance: fixed initial grid, one target grid per
/// later time point, kernel scales and the cost weights lambda (disparity)
/// and rho (proximal parameter).
struct SnapshotProblem {
  SurfaceGrid initial;
  std::vector<SurfaceGrid> targets;
  TimeGrid time;
  KernelConfig kernels;
  double lambda = 0.0;  // 0 = derive at solver setup
  double rho = 0.0;     // 0 = derive at solver setup

  int num_steps() const { return time.steps(); }
  void validate() const;
};

struct CostBreakdown {
  double kin = 0.0;
  double disp = 0.0;
  double total = 0.0;
  std::vector<double> per_snapshot_dsd;
};

/// Shared precomputations for repeated cost evaluations on one problem:
/// the Gram matrix on the initial grid and one disparity workspace per target.
struct EvalContext {
  KernelMatrix gram;
  std::vector<DisparityWorkspace> workspaces;

  explicit EvalContext(const SnapshotProblem& problem);
};

CostBreakdown total_cost(const ControlSequence& controls, const SnapshotProblem& problem);
CostBreakdown total_cost(const ControlSequence& controls, const SnapshotProblem& problem,
                         const EvalContext& ctx);
CostBreakdown total_cost(const Trajectory& trajectory, const ControlSequence& controls,
                         const SnapshotProblem& problem, const EvalContext& ctx);

/// Gradient of the total cost with respect to every control block, by
/// backward accumulation through the state recursion (the kernel matrix in
/// the dynamics is coupled to the state, matching rollout()).
ControlSequence cost_gradient(const ControlSequence& controls, const SnapshotProblem& problem);
ControlSequence cost_gradient(const ControlSequence& controls, const SnapshotProblem& problem,
                              const EvalContext& ctx);

}  // namespace dsm
