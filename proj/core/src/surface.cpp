#include "dsm/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsm {

void SurfaceGrid::validate() const {
  if (points.rows() < 1) throw ValidationError("SurfaceGrid: at least one point required");
  if (!points.allFinite()) throw ValidationError("SurfaceGrid: non-finite coordinate");
  const int n = static_cast<int>(points.rows());
  for (size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (int idx : tri)
      if (idx < 0 || idx >= n)
        throw ValidationError("SurfaceGrid: triangle " + std::to_string(t) +
                              " index out of range");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw ValidationError("SurfaceGrid: triangle " + std::to_string(t) +
                            " repeats a vertex");
  }
}

DisparityWorkspace::DisparityWorkspace(SurfaceGrid target, double kernel_scale)
    : target_(std::move(target)), scale_(kernel_scale) {
  if (!(scale_ > 0.0)) throw ValidationError("DisparityWorkspace: kernel scale must be > 0");
  target_.validate();
  const KernelMatrix q = kernel_matrix(target_.points, scale_);
  const double m = static_cast<double>(target_.size());
  target_self_term_ = q.values.sum() / (m * m);
}

double dsd(const Points& moving, const DisparityWorkspace& ws) {
  const Eigen::Index n = moving.rows();
  if (n == 0) throw ValidationError("dsd: empty moving grid");
  const double s = ws.kernel_scale();
  const Eigen::Index m = ws.target().size();

  const double qxx = kernel_matrix(moving, s).values.sum() / double(n * n);
  const double qxy =
      cross_kernel_matrix(moving, ws.target().points, s).sum() / double(n * m);
  return qxx - 2.0 * qxy + ws.target_self_term();
}

double dsd(const SurfaceGrid& moving, const DisparityWorkspace& ws) {
  return dsd(moving.points, ws);
}

Points dsd_gradient(const Points& moving, const DisparityWorkspace& ws) {
  const Eigen::Index n = moving.rows();
  if (n == 0) throw ValidationError("dsd_gradient: empty moving grid");
  const double s = ws.kernel_scale();
  const double inv_s2 = 1.0 / (s * s);
  const Points& y = ws.target().points;
  const Eigen::Index m = y.rows();

  // grad_a Q(a,b) = -Q(a,b) (a-b)/s^2
  Points grad = Points::Zero(n, 3);
  const Eigen::MatrixXd qxx = kernel_matrix(moving, s).values;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      grad.row(i) -= qxx(i, j) * inv_s2 * (moving.row(i) - moving.row(j));
    }
  grad *= 2.0 / double(n * n);

  const Eigen::MatrixXd qxy = cross_kernel_matrix(moving, y, s);
  Points cross = Points::Zero(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      cross.row(i) -= qxy(i, j) * inv_s2 * (moving.row(i) - y.row(j));
  grad -= (2.0 / double(n * m)) * cross;
  return grad;
}

Points dsd_gradient(const SurfaceGrid& moving, const DisparityWorkspace& ws) {
  return dsd_gradient(moving.points, ws);
}

namespace {

// hess_aa Q(a,b) = Q(a,b) (d d^T / s^4 - I / s^2), d = a - b.
inline Eigen::Matrix3d gauss_block(double q, const Eigen::Vector3d& d, double s) {
  const double inv_s2 = 1.0 / (s * s);
  return q * (inv_s2 * inv_s2 * (d * d.transpose()) -
              inv_s2 * Eigen::Matrix3d::Identity());
}

}  // namespace

Eigen::MatrixXd dsd_hessian(const Points& moving, const DisparityWorkspace& ws) {
  const Eigen::Index n = moving.rows();
  if (n == 0) throw ValidationError("dsd_hessian: empty moving grid");
  const double s = ws.kernel_scale();
  const Points& y = ws.target().points;
  const Eigen::Index m = y.rows();

  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  const Eigen::MatrixXd qxx = kernel_matrix(moving, s).values;
  const double wxx = 2.0 / double(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::Vector3d d = (moving.row(i) - moving.row(j)).transpose();
      const Eigen::Matrix3d blk = wxx * gauss_block(qxx(i, j), d, s);
      hess.block<3, 3>(3 * i, 3 * i) += blk;
      hess.block<3, 3>(3 * j, 3 * j) += blk;
      hess.block<3, 3>(3 * i, 3 * j) -= blk;
      hess.block<3, 3>(3 * j, 3 * i) -= blk;
    }

  const Eigen::MatrixXd qxy = cross_kernel_matrix(moving, y, s);
  const double wxy = 2.0 / double(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Vector3d d = (moving.row(i) - y.row(j)).transpose();
      acc += gauss_block(qxy(i, j), d, s);
    }
    hess.block<3, 3>(3 * i, 3 * i) -= wxy * acc;
  }
  return hess;
}

Eigen::MatrixXd dsd_hessian(const SurfaceGrid& moving, const DisparityWorkspace& ws) {
  return dsd_hessian(moving.points, ws);
}

namespace {

double directed_distances_max(const Points& a, const Points& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      best = std::min(best, (a.row(i) - b.row(j)).squaredNorm());
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

std::vector<double> directed_distances(const Points& a, const Points& b) {
  std::vector<double> out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      best = std::min(best, (a.row(i) - b.row(j)).squaredNorm());
    out[i] = std::sqrt(best);
  }
  return out;
}

}  // namespace

double hausdorff(const SurfaceGrid& a, const SurfaceGrid& b) {
  if (a.size() == 0 || b.size() == 0) throw ValidationError("hausdorff: empty grid");
  return std::max(directed_distances_max(a.points, b.points),
                  directed_distances_max(b.points, a.points));
}

double robust_hausdorff(const SurfaceGrid& a, const SurfaceGrid& b, double q) {
  if (a.size() == 0 || b.size() == 0) throw ValidationError("robust_hausdorff: empty grid");
  if (!(q > 0.0) || q > 1.0)
    throw ValidationError("robust_hausdorff: quantile must lie in (0, 1]");
  const double da = quantile(directed_distances(a.points, b.points), q);
  const double db = quantile(directed_distances(b.points, a.points), q);
  return std::max(da, db);
}

double mesh_size(const SurfaceGrid& grid) {
  const Eigen::Index n = grid.size();
  if (n < 2) throw ValidationError("mesh_size: at least two points required");
  std::vector<double> nn(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      best = std::min(best, (grid.points.row(i) - grid.points.row(j)).squaredNorm());
    }
    nn[i] = std::sqrt(best);
  }
  return quantile(std::move(nn), 0.5);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile: empty sample");
  if (!(q >= 0.0) || q > 1.0) throw ValidationError("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * double(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - double(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace dsm
