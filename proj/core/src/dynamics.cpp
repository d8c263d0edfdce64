#include "dsm/dynamics.hpp"

#include <cmath>

#include "dsm/problem.hpp"

namespace dsm {

void TimeGrid::validate() const {
  if (times.size() < 2) throw ValidationError("TimeGrid: need at least two time points");
  for (size_t k = 0; k + 1 < times.size(); ++k)
    if (!(times[k + 1] > times[k]))
      throw ValidationError("TimeGrid: times must be strictly increasing");
}

ControlSequence ControlSequence::zeros(int steps, Eigen::Index n) {
  ControlSequence out;
  out.alphas.assign(steps, Points::Zero(n, 3));
  return out;
}

void ControlSequence::validate() const {
  for (const auto& a : alphas)
    if (!a.allFinite()) throw ValidationError("ControlSequence: non-finite control");
}

Points velocity_at(const Points& controls_k, const Points& basis, const Points& query,
                   double sigma_v) {
  if (controls_k.rows() != basis.rows())
    throw ValidationError("velocity_at: basis/control size mismatch");
  return cross_kernel_matrix(query, basis, sigma_v) * controls_k;
}

Trajectory rollout(const SurfaceGrid& initial, const ControlSequence& controls,
                   const TimeGrid& time, double sigma_v) {
  time.validate();
  const int steps = time.steps();
  if (controls.steps() != steps)
    throw ValidationError("rollout: control count does not match time steps");
  for (const auto& a : controls.alphas)
    if (a.rows() != initial.size())
      throw ValidationError("rollout: control block size does not match grid");

  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.states.push_back(initial);
  Points x = initial.points;
  for (int k = 0; k < steps; ++k) {
    // U^k_{nj} = K(x^0_j, x^k_n), refreshed from the current state.
    const Eigen::MatrixXd u = cross_kernel_matrix(x, initial.points, sigma_v);
    x += time.tau(k) * (u * controls.alphas[k]);
    if (!x.allFinite())
      throw NumericError("rollout: non-finite state at step " + std::to_string(k + 1));
    SurfaceGrid state;
    state.points = x;
    state.triangles = initial.triangles;
    traj.states.push_back(std::move(state));
  }
  return traj;
}

double kinetic_energy(const ControlSequence& controls, const KernelMatrix& gram,
                      const TimeGrid& time) {
  if (controls.steps() != time.steps())
    throw ValidationError("kinetic_energy: control count does not match time steps");
  double kin = 0.0;
  for (int k = 0; k < controls.steps(); ++k) {
    const Points& a = controls.alphas[k];
    if (a.rows() != gram.size())
      throw ValidationError("kinetic_energy: control block size does not match Gram matrix");
    kin += 0.5 * time.tau(k) * (a.transpose() * gram.values * a).trace();
  }
  return kin;
}

void SnapshotProblem::validate() const {
  initial.validate();
  time.validate();
  kernels.validate();
  if (static_cast<int>(targets.size()) != time.steps())
    throw ValidationError("SnapshotProblem: need one target per time step");
  for (const auto& t : targets) t.validate();
  if (lambda < 0.0) throw ValidationError("SnapshotProblem: lambda must be >= 0");
  if (rho < 0.0) throw ValidationError("SnapshotProblem: rho must be >= 0");
}

EvalContext::EvalContext(const SnapshotProblem& problem)
    : gram(kernel_matrix(problem.initial.points, problem.kernels.sigma_v)) {
  workspaces.reserve(problem.targets.size());
  for (const auto& target : problem.targets)
    workspaces.emplace_back(target, problem.kernels.sigma_d);
}

CostBreakdown total_cost(const ControlSequence& controls, const SnapshotProblem& problem) {
  return total_cost(controls, problem, EvalContext(problem));
}

CostBreakdown total_cost(const ControlSequence& controls, const SnapshotProblem& problem,
                         const EvalContext& ctx) {
  const Trajectory traj =
      rollout(problem.initial, controls, problem.time, problem.kernels.sigma_v);
  return total_cost(traj, controls, problem, ctx);
}

CostBreakdown total_cost(const Trajectory& trajectory, const ControlSequence& controls,
                         const SnapshotProblem& problem, const EvalContext& ctx) {
  CostBreakdown out;
  out.kin = kinetic_energy(controls, ctx.gram, problem.time);
  const int steps = problem.num_steps();
  out.per_snapshot_dsd.resize(steps);
  for (int k = 1; k <= steps; ++k) {
    out.per_snapshot_dsd[k - 1] = dsd(trajectory.states[k].points, ctx.workspaces[k - 1]);
    out.disp += problem.lambda * out.per_snapshot_dsd[k - 1];
  }
  out.total = out.kin + out.disp;
  return out;
}

ControlSequence cost_gradient(const ControlSequence& controls,
                              const SnapshotProblem& problem) {
  return cost_gradient(controls, problem, EvalContext(problem));
}

ControlSequence cost_gradient(const ControlSequence& controls,
                              const SnapshotProblem& problem, const EvalContext& ctx) {
  const double sigma = problem.kernels.sigma_v;
  const double inv_s2 = 1.0 / (sigma * sigma);
  const int steps = problem.num_steps();
  const Trajectory traj = rollout(problem.initial, controls, problem.time, sigma);
  const Points& basis = problem.initial.points;
  const Eigen::Index n = basis.rows();

  ControlSequence grad = ControlSequence::zeros(steps, n);
  // Adjoint sweep: p^k = dJ/dx^k accumulated backward through the recursion.
  Points p = problem.lambda *
             dsd_gradient(traj.states[steps].points, ctx.workspaces[steps - 1]);
  for (int k = steps - 1; k >= 0; --k) {
    const double tau = problem.time.tau(k);
    const Points& xk = traj.states[k].points;
    const Eigen::MatrixXd u = cross_kernel_matrix(xk, basis, sigma);

    grad.alphas[k] = tau * (ctx.gram.values * controls.alphas[k] + u.transpose() * p);

    if (k > 0) {
      Points pk = p;
      // State coupling of the kernel matrix: for each point, the 3x3
      // Jacobian of its own velocity contributes J_n^T p_n.
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (Eigen::Index j = 0; j < n; ++j) {
          const Eigen::Vector3d d = (xk.row(i) - basis.row(j)).transpose();
          acc += u(i, j) * d * controls.alphas[k].row(j).dot(p.row(i));
        }
        pk.row(i) -= tau * inv_s2 * acc.transpose();
      }
      pk += problem.lambda * dsd_gradient(xk, ctx.workspaces[k - 1]);
      p = std::move(pk);
    }
  }
  return grad;
}

}  // namespace dsm
