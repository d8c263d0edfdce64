#include "dsm/baseline.hpp"

#include <chrono>
#include <cmath>

namespace dsm {

void BaselineOptions::validate() const {
  if (max_iterations < 0) throw ValidationError("BaselineOptions: max_iterations must be >= 0");
  if (!(armijo_c > 0 && armijo_c < 1))
    throw ValidationError("BaselineOptions: armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0 && backtrack_factor < 1))
    throw ValidationError("BaselineOptions: backtrack_factor must lie in (0, 1)");
  if (!(initial_step > 0)) throw ValidationError("BaselineOptions: initial_step must be > 0");
  if (!(grad_tol > 0)) throw ValidationError("BaselineOptions: grad_tol must be > 0");
}

namespace {

double dot(const ControlSequence& a, const ControlSequence& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.alphas.size(); ++k)
    s += (a.alphas[k].array() * b.alphas[k].array()).sum();
  return s;
}

ControlSequence axpy(const ControlSequence& a, double t, const ControlSequence& d) {
  ControlSequence out = a;
  for (size_t k = 0; k < out.alphas.size(); ++k) out.alphas[k] -= t * d.alphas[k];
  return out;
}

}  // namespace

SolveReport solve_gd(const SnapshotProblem& problem, const BaselineOptions& options) {
  using Clock = std::chrono::steady_clock;
  options.validate();

  // Share the parameter-derivation path with the splitting solver so both
  // methods see the identical problem instance.
  SnapshotProblem p = problem;
  {
    const SolverOptions resolved = resolve_options(problem, SolverOptions{});
    p.kernels.sigma_v = resolved.sigma_v;
    p.kernels.sigma_d = resolved.sigma_d;
    p.lambda = resolved.lambda;
    p.rho = resolved.rho;
  }
  const EvalContext ctx(p);
  const int steps = p.num_steps();
  const Eigen::Index n = p.initial.size();

  ControlSequence alpha = ControlSequence::zeros(steps, n);
  CostBreakdown cost = total_cost(alpha, p, ctx);

  SolveReport report;
  report.termination = Termination::MaxIterations;
  double step_guess = options.initial_step;
  ControlSequence prev_alpha, prev_grad;
  bool have_prev = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const auto t0 = Clock::now();
    ControlSequence grad = cost_gradient(alpha, p, ctx);
    const double grad_sq = dot(grad, grad);
    if (std::sqrt(grad_sq) <= options.grad_tol) {
      report.termination = Termination::GradientTol;
      break;
    }

    if (have_prev) {
      // Barzilai-Borwein guess from the previous move, clipped to initial_step.
      ControlSequence s = axpy(alpha, 1.0, prev_alpha);
      ControlSequence y = axpy(grad, 1.0, prev_grad);
      const double sy = dot(s, y);
      if (sy > 0) step_guess = std::min(options.initial_step, dot(s, s) / sy);
    }
    prev_alpha = alpha;
    prev_grad = grad;
    have_prev = true;

    double t = step_guess;
    bool accepted = false;
    CostBreakdown trial_cost;
    ControlSequence trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = axpy(alpha, t, grad);
      trial_cost = total_cost(trial, p, ctx);
      if (trial_cost.total <= cost.total - options.armijo_c * t * grad_sq) {
        accepted = true;
        break;
      }
      t *= options.backtrack_factor;
    }
    if (!accepted) {
      report.termination = Termination::Stagnation;
      break;
    }
    alpha = std::move(trial);
    cost = trial_cost;

    IterationRecord rec;
    rec.iteration = iter + 1;
    rec.cost = cost.total;
    rec.kin = cost.kin;
    rec.disp = cost.disp;
    const Trajectory traj = rollout(p.initial, alpha, p.time, p.kernels.sigma_v);
    rec.hausdorff.resize(steps);
    for (int k = 0; k < steps; ++k)
      rec.hausdorff[k] = hausdorff(traj.states[k + 1], p.targets[k]);
    rec.consensus_gap = 0.0;
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    report.history.push_back(rec);
  }

  report.controls = alpha;
  report.trajectory = rollout(p.initial, alpha, p.time, p.kernels.sigma_v);
  return report;
}

}  // namespace dsm
