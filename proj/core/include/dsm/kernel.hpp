#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dsm/errors.hpp"

namespace dsm {

/// Row-per-point storage for 3D point sets.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Scales of the two radial Gaussian kernels: sigma_v drives the velocity
/// kernel, sigma_d the measure-disparity kernel. `ridge` is a diagonal
/// regularization relative to the kernel self-value, applied before
/// factorizing Gram matrices.
struct KernelConfig {
  double sigma_v = 0.0;
  double sigma_d = 0.0;
  double ridge = 1e-8;

  void validate() const;
};

/// Value of the normalized Gaussian kernel at coincidence: (2*pi)^(-3/2) / sigma^3.
double kernel_self_value(double sigma);

/// Normalized radial Gaussian kernel evaluation.
double eval_kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double sigma);

/// Dense symmetric Gram matrix of kernel evaluations on one point set.
struct KernelMatrix {
  Eigen::MatrixXd values;
  double source_scale = 0.0;

  Eigen::Index size() const { return values.rows(); }
};

KernelMatrix kernel_matrix(const Points& points, double sigma);

/// Rectangular kernel matrix, entry (i,j) = kernel(rows[i], cols[j]).
Eigen::MatrixXd cross_kernel_matrix(const Points& rows, const Points& cols, double sigma);

/// Cached lower-triangular Cholesky factor of (matrix + ridge*I), reusable
/// for repeated right-hand sides.
class CholeskyFactor {
 public:
  static CholeskyFactor compute(const Eigen::MatrixXd& matrix, double ridge);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  Eigen::Index size() const { return llt_.matrixLLT().rows(); }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

CholeskyFactor factorize_spd(const KernelMatrix& matrix, double ridge);

}  // namespace dsm
