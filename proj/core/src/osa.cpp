#include "dsm/osa.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace dsm {

void SolverOptions::validate() const {
  if (max_iterations < 0) throw ValidationError("SolverOptions: max_iterations must be >= 0");
  if (rho < 0 || lambda < 0 || sigma_v < 0 || sigma_d < 0 || ridge < 0)
    throw ValidationError("SolverOptions: negative parameter");
  if (!(stop_factor > 0)) throw ValidationError("SolverOptions: stop_factor must be > 0");
  if (gap_tol < 0 || stag_tol < 0)
    throw ValidationError("SolverOptions: negative tolerance");
  if (stag_window < 1) throw ValidationError("SolverOptions: stag_window must be >= 1");
  if (!(inner_tol > 0) || inner_max < 1)
    throw ValidationError("SolverOptions: bad inner Newton settings");
}

PathVars PathVars::zeros(int steps, Eigen::Index n) {
  PathVars out;
  out.states.assign(steps, Points::Zero(n, 3));
  out.controls.assign(steps, Points::Zero(n, 3));
  return out;
}

double PathVars::squared_norm() const {
  double s = 0.0;
  for (const auto& x : states) s += x.squaredNorm();
  for (const auto& a : controls) s += a.squaredNorm();
  return s;
}

double PathVars::norm() const { return std::sqrt(squared_norm()); }

namespace {

PathVars combine(const PathVars& a, const PathVars& b, double sign) {
  PathVars out = a;
  for (size_t k = 0; k < out.states.size(); ++k) out.states[k] += sign * b.states[k];
  for (size_t k = 0; k < out.controls.size(); ++k) out.controls[k] += sign * b.controls[k];
  return out;
}

}  // namespace

PathVars operator+(const PathVars& a, const PathVars& b) { return combine(a, b, 1.0); }
PathVars operator-(const PathVars& a, const PathVars& b) { return combine(a, b, -1.0); }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations: return "max-iterations";
    case Termination::HausdorffVsMesh: return "hausdorff-vs-mesh";
    case Termination::ConsensusGap: return "consensus-gap";
    case Termination::Stagnation: return "stagnation";
    case Termination::GradientTol: return "gradient-tol";
  }
  return "unknown";
}

namespace {

SnapshotProblem apply_scales(SnapshotProblem p, const SolverOptions& o) {
  if (o.sigma_v > 0) p.kernels.sigma_v = o.sigma_v;
  if (o.sigma_d > 0) p.kernels.sigma_d = o.sigma_d;
  if (!(p.kernels.sigma_v > 0)) p.kernels.sigma_v = 2.0 * mesh_size(p.initial);
  if (!(p.kernels.sigma_d > 0)) p.kernels.sigma_d = mesh_size(p.targets.front());
  p.kernels.ridge = o.ridge;
  if (o.lambda > 0) p.lambda = o.lambda;
  if (o.rho > 0) p.rho = o.rho;
  return p;
}

// Kinetic energy of the control that carries each initial point straight to
// its nearest final-target point over the full time span. Anchors the
// default lambda to the problem's own scale.
double straight_line_kin(const SnapshotProblem& p, const CholeskyFactor& gram_factor) {
  const Points& x0 = p.initial.points;
  const Points& yl = p.targets.back().points;
  Points disp(x0.rows(), 3);
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    Eigen::Index best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < yl.rows(); ++j) {
      const double d = (x0.row(i) - yl.row(j)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    disp.row(i) = yl.row(best) - x0.row(i);
  }
  const double span = p.time.times.back() - p.time.times.front();
  const Points vel = disp / span;
  const Points alpha = gram_factor.solve(vel);
  return 0.5 * span * (vel.array() * alpha.array()).sum();
}

}  // namespace

SolverOptions resolve_options(const SnapshotProblem& problem, SolverOptions options) {
  OsaSolver solver(problem, std::move(options));
  return solver.options();
}

OsaSolver::OsaSolver(SnapshotProblem problem, SolverOptions options)
    : problem_(apply_scales(std::move(problem), options)),
      options_(std::move(options)),
      ctx_((problem_.validate(), problem_)),
      gram_factor_(factorize_spd(ctx_.gram,
                                 problem_.kernels.ridge *
                                     kernel_self_value(problem_.kernels.sigma_v))) {
  options_.validate();
  gram_factorizations_ = 1;

  const double kin_sl = straight_line_kin(problem_, gram_factor_);
  if (!(problem_.lambda > 0)) {
    const double d0 = dsd(problem_.initial.points, ctx_.workspaces.back());
    problem_.lambda = (kin_sl > 0 && d0 > 1e-300) ? 10.0 * kin_sl / d0 : 1.0;
  }
  if (!(problem_.rho > 0)) {
    // The proximal terms rho ||X - W||^2 should cost about as much as the
    // objective itself when X strays a full deformation away from consensus,
    // so rho is the objective scale divided by the squared travel budget
    // (N points times L blocks times the far-target Hausdorff distance).
    const double h = hausdorff(problem_.initial, problem_.targets.back());
    const double budget =
        double(problem_.initial.size()) * problem_.num_steps() * h * h;
    problem_.rho = (kin_sl > 0 && budget > 1e-300) ? kin_sl / budget : 1.0;
  }

  // Echo the effective settings.
  options_.sigma_v = problem_.kernels.sigma_v;
  options_.sigma_d = problem_.kernels.sigma_d;
  options_.lambda = problem_.lambda;
  options_.rho = problem_.rho;

  const int steps = problem_.num_steps();
  step_factors_.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    Eigen::MatrixXd s = problem_.time.tau(k) * ctx_.gram.values;
    s.diagonal().array() += 2.0 * problem_.rho;
    step_factors_.push_back(CholeskyFactor::compute(s, 0.0));
  }

  if (options_.frozen_u) {
    std::vector<Eigen::MatrixXd> frozen(steps, ctx_.gram.values);
    frozen_schur_ = build_schur_factor(frozen);
  }
  init_done_ = true;
}

std::vector<Eigen::MatrixXd> OsaSolver::dynamics_matrices(const PathVars& from) const {
  const int steps = problem_.num_steps();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(steps);
  if (options_.frozen_u) {
    out.assign(steps, ctx_.gram.values);
    return out;
  }
  const Points* base = &problem_.initial.points;
  for (int k = 0; k < steps; ++k) {
    out.push_back(cross_kernel_matrix(*base, problem_.initial.points,
                                      problem_.kernels.sigma_v));
    base = &from.states[k];
  }
  return out;
}

OsaSolver::TridiagFactor OsaSolver::build_schur_factor(
    const std::vector<Eigen::MatrixXd>& u_mats) {
  const int steps = problem_.num_steps();
  const Eigen::Index n = problem_.initial.size();
  const double rho = problem_.rho;

  TridiagFactor f;
  f.off = -1.0 / (2.0 * rho);
  f.llt.reserve(steps);
  f.inverse.reserve(steps);
  Eigen::MatrixXd schur;
  for (int k = 0; k < steps; ++k) {
    const double tau = problem_.time.tau(k);
    const Eigen::MatrixXd w = step_factors_[k].solve(u_mats[k].transpose());
    Eigen::MatrixXd d = tau * tau * (u_mats[k] * w);
    d = 0.5 * (d + d.transpose()).eval();
    d.diagonal().array() += (k == 0) ? 1.0 / (2.0 * rho) : 1.0 / rho;
    if (k == 0)
      schur = std::move(d);
    else
      schur = d - (f.off * f.off) * f.inverse.back();

    f.llt.emplace_back(schur);
    if (f.llt.back().info() != Eigen::Success)
      throw NumericError("quadratic_prox: KKT Schur factorization failed at step " +
                         std::to_string(k));
    f.inverse.push_back(
        f.llt.back().solve(Eigen::MatrixXd::Identity(n, n)));
    if (init_done_) ++post_init_factorizations_;
  }
  return f;
}

std::vector<Points> OsaSolver::TridiagFactor::solve(std::vector<Points> rhs) const {
  const int steps = static_cast<int>(rhs.size());
  for (int k = 1; k < steps; ++k)
    rhs[k] -= off * (inverse[k - 1] * rhs[k - 1]).eval();
  std::vector<Points> m(steps);
  m[steps - 1] = llt[steps - 1].solve(rhs[steps - 1]);
  for (int k = steps - 2; k >= 0; --k)
    m[k] = llt[k].solve(rhs[k] - off * m[k + 1]);
  return m;
}

QuadProxResult OsaSolver::quadratic_prox(const PathVars& anchor,
                                         const std::vector<Eigen::MatrixXd>& u_mats) {
  const int steps = problem_.num_steps();
  const double rho = problem_.rho;

  // Right-hand side of the multiplier system, one block per constraint.
  std::vector<Points> sa(steps);  // S_k^{-1} alpha-anchor
  std::vector<Points> rhs(steps);
  const Points* prev = &problem_.initial.points;
  for (int k = 0; k < steps; ++k) {
    const double tau = problem_.time.tau(k);
    sa[k] = step_factors_[k].solve(anchor.controls[k]);
    rhs[k] = anchor.states[k] - *prev - 2.0 * rho * tau * (u_mats[k] * sa[k]);
    prev = &anchor.states[k];
  }

  const TridiagFactor* factor;
  TridiagFactor local;
  if (options_.frozen_u) {
    factor = &*frozen_schur_;
  } else {
    local = build_schur_factor(u_mats);
    factor = &local;
  }
  std::vector<Points> mult = factor->solve(std::move(rhs));

  QuadProxResult res;
  res.point = PathVars::zeros(steps, problem_.initial.size());
  for (int k = 0; k < steps; ++k) {
    const double tau = problem_.time.tau(k);
    res.point.controls[k] =
        2.0 * rho * sa[k] + tau * step_factors_[k].solve(u_mats[k].transpose() * mult[k]);
    const Points& next_mult =
        (k + 1 < steps) ? mult[k + 1] : Points::Zero(problem_.initial.size(), 3);
    res.point.states[k] =
        anchor.states[k] - (mult[k] - next_mult) / (2.0 * rho);
  }
  res.multipliers = std::move(mult);
  return res;
}

Points OsaSolver::newton_minimize(int r, const Points& start, const Points& anchor_state,
                                  const std::optional<Points>& anchor_control,
                                  const Eigen::MatrixXd& u, const Points& x_prev) {
  const double tau = problem_.time.tau(r);
  const double rho = problem_.rho;
  const double lambda = problem_.lambda;
  const DisparityWorkspace& ws = ctx_.workspaces[r];
  const Eigen::Index n = start.rows();

  const auto objective = [&](const Points& a) {
    const Points x = x_prev + tau * (u * a);
    double f = lambda * dsd(x, ws) + rho * (x - anchor_state).squaredNorm();
    if (anchor_control) f += rho * (a - *anchor_control).squaredNorm();
    return f;
  };

  Points a = start;
  double f = objective(a);
  double grad0_norm = 0.0;
  int dbg_newton = 0, dbg_cg = 0;
  for (int it = 0; it < options_.inner_max; ++it) {
    ++dbg_newton;
    const Points x = x_prev + tau * (u * a);
    Points gx = lambda * dsd_gradient(x, ws) + 2.0 * rho * (x - anchor_state);
    Points grad = tau * (u.transpose() * gx);
    if (anchor_control) grad += 2.0 * rho * (a - *anchor_control);
    const double grad_norm = grad.norm();
    if (it == 0) grad0_norm = grad_norm;
    // Absolute floor plus a relative stop so badly scaled instances do not
    // burn the whole inner budget chasing an unreachable absolute norm.
    if (grad_norm <= options_.inner_tol * (1.0 + grad0_norm)) break;

    // H = tau^2 B^T (lambda Hdsd + 2 rho I) B (+ 2 rho I), B = U (x) I3.
    // The direction comes from truncated CG on Hessian-vector products; the
    // dense Hessian is only built in x-space (interleaved xyz ordering, point
    // i at rows 3i..3i+2) where it costs O(N^2), never in control space.
    Eigen::MatrixXd hx = lambda * dsd_hessian(x, ws);
    hx.diagonal().array() += 2.0 * rho;

    const auto interleave = [n](const Points& m) {
      Eigen::VectorXd v(3 * n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) v(3 * i + c) = m(i, c);
      return v;
    };
    const auto deinterleave = [n](const Eigen::VectorXd& v) {
      Points m(n, 3);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) m(i, c) = v(3 * i + c);
      return m;
    };
    const auto hess_vec = [&](const Points& v) {
      const Points bv = u * v;
      const Points hbv = deinterleave(hx * interleave(bv));
      Points out = (tau * tau) * (u.transpose() * hbv);
      if (anchor_control) out += 2.0 * rho * v;
      return out;
    };

    // Truncated CG with a negative-curvature exit; the zero-iterate case
    // degrades to the steepest-descent direction.
    Points step = Points::Zero(n, 3);
    {
      Points resid = -grad;
      Points p = resid;
      double rr = resid.squaredNorm();
      // Eisenstat-Walker forcing: loose early, tightening as the outer
      // Newton iteration approaches the minimizer.
      const double forcing =
          std::min(0.5, std::sqrt(grad_norm / (1.0 + grad0_norm)));
      const double cg_tol = forcing * std::sqrt(rr);
      const int cg_max = static_cast<int>(std::min<Eigen::Index>(3 * n, 60));
      for (int cg = 0; cg < cg_max && std::sqrt(rr) > cg_tol; ++cg, ++dbg_cg) {
        const Points hp = hess_vec(p);
        const double php = (p.array() * hp.array()).sum();
        if (php <= 1e-14 * p.squaredNorm()) {
          if (cg == 0) step = resid;
          break;
        }
        const double a_step = rr / php;
        step += a_step * p;
        resid -= a_step * hp;
        const double rr_new = resid.squaredNorm();
        p = resid + (rr_new / rr) * p;
        rr = rr_new;
      }
      if (step.squaredNorm() == 0.0) step = -grad;
    }
    double slope_mat = (step.array() * grad.array()).sum();
    if (!step.allFinite() || slope_mat >= 0.0) {
      step = -grad;
      slope_mat = -grad.squaredNorm();
    }

    const double slope = slope_mat;
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Points cand = a + t * step;
      const double fc = objective(cand);
      if (std::isfinite(fc) && fc <= f + 1e-4 * t * slope) {
        a = cand;
        f = fc;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!a.allFinite())
      throw NumericError("disparity_prox: non-finite iterate at step r=" +
                         std::to_string(r) + ", inner iteration " + std::to_string(it));
    if (!accepted) break;
  }
  if (std::getenv("DSM_DEBUG_INNER"))
    std::fprintf(stderr, "prox r=%d newton=%d cg=%d\n", r, dbg_newton, dbg_cg);
  return a;
}

PathVars OsaSolver::disparity_prox(const PathVars& anchor,
                                   const std::vector<Eigen::MatrixXd>& u_mats) {
  const int steps = problem_.num_steps();
  PathVars out = PathVars::zeros(steps, problem_.initial.size());
  Points x_prev = problem_.initial.points;
  for (int r = 0; r < steps; ++r) {
    const std::optional<Points> anchor_control =
        (r > 0) ? std::optional<Points>(anchor.controls[r]) : std::nullopt;
    const Points a = newton_minimize(r, anchor.controls[r], anchor.states[r],
                                     anchor_control, u_mats[r], x_prev);
    out.controls[r] = a;
    out.states[r] = x_prev + problem_.time.tau(r) * (u_mats[r] * a);
    x_prev = out.states[r];
  }
  return out;
}

ConsensusState OsaSolver::initial_state() const {
  const int steps = problem_.num_steps();
  const Eigen::Index n = problem_.initial.size();
  ConsensusState state;
  state.z = PathVars::zeros(steps, n);
  state.z_tilde = PathVars::zeros(steps, n);
  for (auto& s : state.z_tilde.states) s = problem_.initial.points;
  state.u = PathVars::zeros(steps, n);
  return state;
}

void OsaSolver::dr_iterate(ConsensusState& state) {
  const auto u_for_quad = dynamics_matrices(state.z_tilde);
  state.z = quadratic_prox(state.z_tilde + state.u, u_for_quad).point;
  const auto u_for_disp = dynamics_matrices(state.z);
  state.z_tilde = disparity_prox(state.z - state.u, u_for_disp);
  state.u = state.u + (state.z_tilde - state.z);
  ++state.iteration;
}

SolveReport OsaSolver::solve() {
  using Clock = std::chrono::steady_clock;
  const int steps = problem_.num_steps();

  std::vector<double> target_mesh(steps);
  for (int k = 0; k < steps; ++k) target_mesh[k] = mesh_size(problem_.targets[k]);

  ConsensusState state = initial_state();
  SolveReport report;
  report.termination = Termination::MaxIterations;

  for (int iter = 0; iter < options_.max_iterations; ++iter) {
    const auto t0 = Clock::now();
    dr_iterate(state);

    IterationRecord rec;
    rec.iteration = state.iteration;
    ControlSequence controls{state.z_tilde.controls};
    const Trajectory traj =
        rollout(problem_.initial, controls, problem_.time, problem_.kernels.sigma_v);
    const CostBreakdown cost = total_cost(traj, controls, problem_, ctx_);
    rec.cost = cost.total;
    rec.kin = cost.kin;
    rec.disp = cost.disp;
    rec.hausdorff.resize(steps);
    for (int k = 0; k < steps; ++k)
      rec.hausdorff[k] = hausdorff(traj.states[k + 1], problem_.targets[k]);
    rec.consensus_gap = (state.z - state.z_tilde).norm();
    if (options_.record_timing)
      rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    report.history.push_back(rec);

    bool matched = true;
    for (int k = 0; k < steps; ++k)
      if (rec.hausdorff[k] > options_.stop_factor * target_mesh[k]) matched = false;
    if (matched) {
      report.termination = Termination::HausdorffVsMesh;
      break;
    }
    if (options_.gap_tol > 0 &&
        rec.consensus_gap <= options_.gap_tol * std::max(1.0, state.z.norm())) {
      report.termination = Termination::ConsensusGap;
      break;
    }
    const int w = options_.stag_window;
    if (static_cast<int>(report.history.size()) > w) {
      const double then = report.history[report.history.size() - 1 - w].cost;
      if (std::abs(rec.cost - then) < options_.stag_tol * std::max(1.0, std::abs(then))) {
        report.termination = Termination::Stagnation;
        break;
      }
    }
  }

  report.controls = ControlSequence{state.z_tilde.controls};
  if (report.controls.alphas.empty())
    report.controls = ControlSequence::zeros(steps, problem_.initial.size());
  report.trajectory =
      rollout(problem_.initial, report.controls, problem_.time, problem_.kernels.sigma_v);
  report.gram_factorizations = gram_factorizations_;
  report.post_init_factorizations = post_init_factorizations_;
  return report;
}

SolveReport solve(const SnapshotProblem& problem, const SolverOptions& options) {
  OsaSolver solver(problem, options);
  return solver.solve();
}

}  // namespace dsm
