#include "dsm/synth.hpp"

#include <cmath>
#include <random>

namespace dsm {

void SyntheticSpec::validate() const {
  if (n_points < 4 || m_points < 4)
    throw ValidationError("SyntheticSpec: point counts must be >= 4");
  if (n_snapshots < 1) throw ValidationError("SyntheticSpec: need at least one snapshot");
  if (!std::isfinite(magnitude)) throw ValidationError("SyntheticSpec: magnitude not finite");
  if (noise < 0) throw ValidationError("SyntheticSpec: noise must be >= 0");
}

SurfaceGrid make_sphere(int n, double radius, const Eigen::Vector3d& center) {
  if (n < 4) throw ValidationError("make_sphere: need at least 4 points");
  const int segments = std::max(3, static_cast<int>(std::lround(std::sqrt(double(n)))));
  const int rings = std::max(2, static_cast<int>(std::lround(double(n - 2) / segments)));
  const int count = rings * segments + 2;

  SurfaceGrid grid;
  grid.points.resize(count, 3);
  grid.points.row(0) = (center + Eigen::Vector3d(0, 0, radius)).transpose();
  for (int r = 0; r < rings; ++r) {
    const double phi = M_PI * double(r + 1) / double(rings + 1);
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * M_PI * double(s) / double(segments);
      const Eigen::Vector3d p(radius * std::sin(phi) * std::cos(theta),
                              radius * std::sin(phi) * std::sin(theta),
                              radius * std::cos(phi));
      grid.points.row(1 + r * segments + s) = (center + p).transpose();
    }
  }
  grid.points.row(count - 1) = (center - Eigen::Vector3d(0, 0, radius)).transpose();

  const auto ring_vertex = [&](int r, int s) { return 1 + r * segments + (s % segments); };
  for (int s = 0; s < segments; ++s)
    grid.triangles.push_back({0, ring_vertex(0, s), ring_vertex(0, s + 1)});
  for (int r = 0; r + 1 < rings; ++r)
    for (int s = 0; s < segments; ++s) {
      const int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      grid.triangles.push_back({a, c, b});
      grid.triangles.push_back({b, c, d});
    }
  for (int s = 0; s < segments; ++s)
    grid.triangles.push_back({count - 1, ring_vertex(rings - 1, s + 1), ring_vertex(rings - 1, s)});
  return grid;
}

SurfaceGrid make_open_sheet(int n) {
  if (n < 4) throw ValidationError("make_open_sheet: need at least 4 points");
  const int g = std::max(2, static_cast<int>(std::lround(std::sqrt(double(n)))));
  SurfaceGrid grid;
  grid.points.resize(g * g, 3);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double u = double(i) / double(g - 1);
      const double v = double(j) / double(g - 1);
      grid.points.row(i * g + j) =
          Eigen::RowVector3d(u, v, 0.15 * std::sin(M_PI * u) * std::sin(M_PI * v));
    }
  for (int i = 0; i + 1 < g; ++i)
    for (int j = 0; j + 1 < g; ++j) {
      const int a = i * g + j, b = i * g + j + 1, c = (i + 1) * g + j, d = (i + 1) * g + j + 1;
      grid.triangles.push_back({a, b, c});
      grid.triangles.push_back({b, d, c});
    }
  return grid;
}

namespace {

SurfaceGrid make_base(BaseShape shape, int n) {
  switch (shape) {
    case BaseShape::Sphere:
      return make_sphere(n);
    case BaseShape::Ellipsoid: {
      SurfaceGrid g = make_sphere(n);
      g.points.col(1) *= 0.7;
      g.points.col(2) *= 0.5;
      return g;
    }
    case BaseShape::OpenSheet:
      return make_open_sheet(n);
  }
  throw ValidationError("make_base: unknown shape");
}

Eigen::Vector3d bump_center(BaseShape shape) {
  return shape == BaseShape::OpenSheet ? Eigen::Vector3d(0.5, 0.5, 0.15)
                                       : Eigen::Vector3d(1.0, 0.0, 0.0);
}

// Deformed position at progress fraction s in [0, 1].
Points deform(const Points& base, const SyntheticSpec& spec, double s,
              const Eigen::Vector3d& centroid) {
  Points out = base;
  switch (spec.deformation) {
    case Deformation::Translation:
      out.col(0).array() += s * spec.magnitude;
      break;
    case Deformation::UniformScale: {
      const double factor = 1.0 + s * (spec.magnitude - 1.0);
      for (Eigen::Index i = 0; i < out.rows(); ++i)
        out.row(i) = centroid.transpose() + factor * (base.row(i) - centroid.transpose());
      break;
    }
    case Deformation::SmoothBump: {
      const Eigen::Vector3d c = bump_center(spec.base_shape);
      const double width = spec.base_shape == BaseShape::OpenSheet ? 0.25 : 0.5;
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double w =
            std::exp(-(base.row(i).transpose() - c).squaredNorm() / (2.0 * width * width));
        out(i, 0) += s * spec.magnitude * w;
      }
      break;
    }
  }
  return out;
}

}  // namespace

SyntheticProblem generate(const SyntheticSpec& spec) {
  spec.validate();
  const SurfaceGrid initial = make_base(spec.base_shape, spec.n_points);
  const SurfaceGrid target_base = make_base(spec.base_shape, spec.m_points);
  const Eigen::Vector3d centroid = initial.points.colwise().mean().transpose();
  const int steps = spec.n_snapshots;

  SyntheticProblem out;
  out.problem.initial = initial;
  out.problem.time.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) out.problem.time.times[k] = 0.04 * k;

  out.ground_truth.states.push_back(initial);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 1; k <= steps; ++k) {
    const double s = double(k) / double(steps);
    SurfaceGrid target;
    target.points = deform(target_base.points, spec, s, centroid);
    target.triangles = target_base.triangles;
    if (spec.noise > 0)
      for (Eigen::Index i = 0; i < target.points.rows(); ++i)
        for (int c = 0; c < 3; ++c) target.points(i, c) += spec.noise * gauss(rng);
    out.problem.targets.push_back(std::move(target));

    SurfaceGrid truth;
    truth.points = deform(initial.points, spec, s, centroid);
    truth.triangles = initial.triangles;
    out.ground_truth.states.push_back(std::move(truth));
  }
  return out;
}

BaseShape parse_base_shape(const std::string& name) {
  if (name == "sphere") return BaseShape::Sphere;
  if (name == "ellipsoid") return BaseShape::Ellipsoid;
  if (name == "open-sheet") return BaseShape::OpenSheet;
  throw ValidationError("unknown base shape: " + name);
}

Deformation parse_deformation(const std::string& name) {
  if (name == "translation") return Deformation::Translation;
  if (name == "uniform-scale") return Deformation::UniformScale;
  if (name == "smooth-bump") return Deformation::SmoothBump;
  throw ValidationError("unknown deformation: " + name);
}

std::string to_string(BaseShape s) {
  switch (s) {
    case BaseShape::Sphere: return "sphere";
    case BaseShape::Ellipsoid: return "ellipsoid";
    case BaseShape::OpenSheet: return "open-sheet";
  }
  return "unknown";
}

std::string to_string(Deformation d) {
  switch (d) {
    case Deformation::Translation: return "translation";
    case Deformation::UniformScale: return "uniform-scale";
    case Deformation::SmoothBump: return "smooth-bump";
  }
  return "unknown";
}

}  // namespace dsm
