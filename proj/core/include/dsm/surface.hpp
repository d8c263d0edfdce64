#pragma once

#include <array>
#include <vector>

#include "dsm/kernel.hpp"

namespace dsm {

/// Ordered 3D point grid discretizing a surface, optionally triangulated.
struct SurfaceGrid {
  Points points;
  std::vector<std::array<int, 3>> triangles;

  Eigen::Index size() const { return points.rows(); }
  bool has_triangles() const { return !triangles.empty(); }
  void validate() const;
};

/// Fixed target grid with its precomputed self term q(yy) of the
/// kernel-measure disparity, so repeated evaluations against the same
/// target only pay for the cross and moving-moving sums.
class DisparityWorkspace {
 public:
  DisparityWorkspace(SurfaceGrid target, double kernel_scale);

  const SurfaceGrid& target() const { return target_; }
  double kernel_scale() const { return scale_; }
  double target_self_term() const { return target_self_term_; }

 private:
  SurfaceGrid target_;
  double scale_;
  double target_self_term_;
};

/// Squared kernel-measure distance between the empirical measures of the
/// moving and target grids: q(xx) - 2 q(xy) + q(yy).
double dsd(const Points& moving, const DisparityWorkspace& workspace);
double dsd(const SurfaceGrid& moving, const DisparityWorkspace& workspace);

/// Analytic gradient of dsd with respect to the moving points, one row per point.
Points dsd_gradient(const Points& moving, const DisparityWorkspace& workspace);
Points dsd_gradient(const SurfaceGrid& moving, const DisparityWorkspace& workspace);

/// Analytic dense Hessian of dsd with respect to the flattened moving grid
/// (point n occupies rows/cols 3n..3n+2).
Eigen::MatrixXd dsd_hessian(const Points& moving, const DisparityWorkspace& workspace);
Eigen::MatrixXd dsd_hessian(const SurfaceGrid& moving, const DisparityWorkspace& workspace);

double hausdorff(const SurfaceGrid& a, const SurfaceGrid& b);

/// Hausdorff-type distance using a quantile of the nearest-neighbor
/// distances instead of the maximum; quantile 1 recovers hausdorff().
double robust_hausdorff(const SurfaceGrid& a, const SurfaceGrid& b, double quantile = 0.95);

/// Median nearest-neighbor distance, the grid's representative spacing.
double mesh_size(const SurfaceGrid& grid);

/// Empirical quantile with linear interpolation between order statistics.
/// Sorts a copy of `values`; q must lie in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace dsm
