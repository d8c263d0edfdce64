#include "dsm/kernel.hpp"

#include <cmath>

namespace dsm {

namespace {
constexpr double kTwoPiPow = 15.749609945722419;  // (2*pi)^(3/2)
}

void KernelConfig::validate() const {
  if (!(sigma_v > 0.0)) throw ValidationError("KernelConfig: sigma_v must be > 0");
  if (!(sigma_d > 0.0)) throw ValidationError("KernelConfig: sigma_d must be > 0");
  if (!(ridge >= 0.0)) throw ValidationError("KernelConfig: ridge must be >= 0");
}

double kernel_self_value(double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("kernel scale must be > 0");
  return 1.0 / (kTwoPiPow * sigma * sigma * sigma);
}

double eval_kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double sigma) {
  const double norm = kernel_self_value(sigma);
  return norm * std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

KernelMatrix kernel_matrix(const Points& points, double sigma) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw ValidationError("kernel_matrix: empty point set");
  const double norm = kernel_self_value(sigma);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

  KernelMatrix out;
  out.source_scale = sigma;
  out.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i, i) = norm;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = norm * std::exp(-(points.row(i) - points.row(j)).squaredNorm() * inv2s2);
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  }
  return out;
}

Eigen::MatrixXd cross_kernel_matrix(const Points& rows, const Points& cols, double sigma) {
  if (rows.rows() == 0 || cols.rows() == 0)
    throw ValidationError("cross_kernel_matrix: empty point set");
  const double norm = kernel_self_value(sigma);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

  Eigen::MatrixXd out(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < cols.rows(); ++j)
      out(i, j) = norm * std::exp(-(rows.row(i) - cols.row(j)).squaredNorm() * inv2s2);
  return out;
}

CholeskyFactor CholeskyFactor::compute(const Eigen::MatrixXd& matrix, double ridge) {
  if (matrix.rows() != matrix.cols())
    throw ValidationError("CholeskyFactor: matrix must be square");
  if (!(ridge >= 0.0)) throw ValidationError("CholeskyFactor: ridge must be >= 0");

  Eigen::MatrixXd regularized = matrix;
  regularized.diagonal().array() += ridge;

  CholeskyFactor out;
  out.llt_.compute(regularized);
  if (out.llt_.info() != Eigen::Success) {
    // Re-run a scalar Cholesky to locate the failing pivot for the error.
    const Eigen::Index n = regularized.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index pivot = n - 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = regularized(j, j) - l.row(j).head(j).squaredNorm();
      if (!(d > 0.0)) {
        pivot = j;
        break;
      }
      l(j, j) = std::sqrt(d);
      for (Eigen::Index i = j + 1; i < n; ++i)
        l(i, j) = (regularized(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
    throw NumericError("Cholesky factorization failed at pivot " + std::to_string(pivot));
  }
  return out;
}

CholeskyFactor factorize_spd(const KernelMatrix& matrix, double ridge) {
  return CholeskyFactor::compute(matrix.values, ridge);
}

}  // namespace dsm
