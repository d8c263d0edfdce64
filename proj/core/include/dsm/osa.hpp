#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsm/problem.hpp"

namespace dsm {

struct SolverOptions {
  int max_iterations = 200;
  // Zero means "derive from the problem": rho = lambda / 10, lambda from the
  // kinetic energy of a straight-line interpolating control, sigma_v and
  // sigma_d from the grids' mesh sizes.
  double rho = 0.0;
  double lambda = 0.0;
  double sigma_v = 0.0;
  double sigma_d = 0.0;
  double ridge = 1e-8;  // relative to the kernel self-value
  double stop_factor = 1.5;
  double gap_tol = 0.0;  // consensus-gap stop, relative to ||Z||; 0 disables
  double stag_tol = 1e-10;
  int stag_window = 10;
  double inner_tol = 1e-8;
  int inner_max = 50;
  bool frozen_u = false;
  unsigned long seed = 0;
  bool record_timing = true;

  void validate() const;
};

/// The flat unknown of the consensus problem: states x^1..x^L and controls
/// alpha^0..alpha^{L-1}. x^0 is pinned to the problem's initial grid and is
/// never a variable.
struct PathVars {
  std::vector<Points> states;
  std::vector<Points> controls;

  static PathVars zeros(int steps, Eigen::Index n);
  double squared_norm() const;
  double norm() const;
};

PathVars operator+(const PathVars& a, const PathVars& b);
PathVars operator-(const PathVars& a, const PathVars& b);

/// Primal iterate Z, dual-dynamics iterate Z-tilde, and the running
/// consensus residual u.
struct ConsensusState {
  PathVars z;
  PathVars z_tilde;
  PathVars u;
  int iteration = 0;
};

enum class Termination { MaxIterations, HausdorffVsMesh, ConsensusGap, Stagnation, GradientTol };

std::string to_string(Termination t);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double kin = 0.0;
  double disp = 0.0;
  std::vector<double> hausdorff;  // per snapshot, against the rolled-out states
  double consensus_gap = 0.0;
  double seconds = 0.0;
};

struct SolveReport {
  ControlSequence controls;
  Trajectory trajectory;
  std::vector<IterationRecord> history;
  Termination termination = Termination::MaxIterations;
  int gram_factorizations = 0;
  int post_init_factorizations = 0;
};

struct QuadProxResult {
  PathVars point;
  std::vector<Points> multipliers;  // one Lagrange block per dynamics constraint
};

/// Douglas-Rachford consensus solver. Construction resolves the derived
/// parameters and factorizes every fixed matrix; iterations only reuse the
/// cached factors (plus, in refresh mode, the per-iteration Schur factor of
/// the constraint block).
class OsaSolver {
 public:
  OsaSolver(SnapshotProblem problem, SolverOptions options);

  /// Constraint matrices U^k frozen from the given iterate's trajectory
  /// (or the initial Gram matrix everywhere in frozen_u mode).
  std::vector<Eigen::MatrixXd> dynamics_matrices(const PathVars& from) const;

  /// Exact minimizer of kin(X) + rho ||X - anchor||^2 subject to the L
  /// linear dynamics constraints, via the KKT system.
  QuadProxResult quadratic_prox(const PathVars& anchor,
                                const std::vector<Eigen::MatrixXd>& frozen_dynamics);

  /// Sequential per-step minimization of disp(X) + rho ||X - anchor||^2
  /// along the frozen dynamics, each step by damped Newton descent.
  PathVars disparity_prox(const PathVars& anchor,
                          const std::vector<Eigen::MatrixXd>& frozen_dynamics);

  /// One full splitting iteration; updates the state in place and appends a
  /// history record.
  void dr_iterate(ConsensusState& state);

  SolveReport solve();

  ConsensusState initial_state() const;

  const SnapshotProblem& problem() const { return problem_; }
  const SolverOptions& options() const { return options_; }  // resolved values
  const KernelMatrix& gram() const { return ctx_.gram; }
  int gram_factorizations() const { return gram_factorizations_; }
  int post_init_factorizations() const { return post_init_factorizations_; }

 private:
  struct TridiagFactor {
    std::vector<Eigen::LLT<Eigen::MatrixXd>> llt;
    std::vector<Eigen::MatrixXd> inverse;  // explicit inverses of the Schur blocks
    double off = 0.0;                      // constant off-diagonal coefficient

    std::vector<Points> solve(std::vector<Points> rhs) const;
  };

  TridiagFactor build_schur_factor(const std::vector<Eigen::MatrixXd>& u_mats);
  Points newton_minimize(int r, const Points& start, const Points& anchor_state,
                         const std::optional<Points>& anchor_control,
                         const Eigen::MatrixXd& u, const Points& x_prev);
  std::vector<IterationRecord>* history_sink_ = nullptr;

  SnapshotProblem problem_;
  SolverOptions options_;
  EvalContext ctx_;
  CholeskyFactor gram_factor_;                 // K + ridge, one factorization
  std::vector<CholeskyFactor> step_factors_;   // tau_k K + 2 rho I per step
  std::optional<TridiagFactor> frozen_schur_;  // cached when frozen_u
  int gram_factorizations_ = 0;
  int post_init_factorizations_ = 0;
  bool init_done_ = false;
};

SolveReport solve(const SnapshotProblem& problem, const SolverOptions& options = {});

/// Fills every zero "derive from the problem" field; used by the solver
/// constructor and exposed so reports can echo the effective settings.
SolverOptions resolve_options(const SnapshotProblem& problem, SolverOptions options);

}  // namespace dsm
