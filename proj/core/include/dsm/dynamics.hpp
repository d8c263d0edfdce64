#pragma once

#include <vector>

#include "dsm/surface.hpp"

namespace dsm {

/// Strictly increasing time grid t_0 < ... < t_L.
struct TimeGrid {
  std::vector<double> times;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double tau(int k) const { return times[k + 1] - times[k]; }
  void validate() const;
};

/// Control blocks alpha^k, one per time step, each one row per basis point.
struct ControlSequence {
  std::vector<Points> alphas;

  int steps() const { return static_cast<int>(alphas.size()); }
  static ControlSequence zeros(int steps, Eigen::Index n);
  void validate() const;
};

/// States x^0..x^L produced by the discrete dynamics.
struct Trajectory {
  std::vector<SurfaceGrid> states;
};

/// Kernel-expanded velocity field at the query points:
/// v(z) = sum_n K(basis_n, z) controls_n.
Points velocity_at(const Points& controls_k, const Points& basis, const Points& query,
                   double sigma_v);

/// Forward recursion x^{k+1}_n = x^k_n + tau_k sum_j K(x^0_j, x^k_n) alpha^k_j.
/// Triangulation of the initial grid is carried along on every state.
Trajectory rollout(const SurfaceGrid& initial, const ControlSequence& controls,
                   const TimeGrid& time, double sigma_v);

/// (1/2) sum_k tau_k (alpha^k)^T K alpha^k over the Gram matrix on the
/// initial grid.
double kinetic_energy(const ControlSequence& controls, const KernelMatrix& gram,
                      const TimeGrid& time);

}  // namespace dsm
