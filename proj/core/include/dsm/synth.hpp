#pragma once

#include <cstdint>
#include <string>

#include "dsm/problem.hpp"

namespace dsm {

enum class BaseShape { Sphere, Ellipsoid, OpenSheet };
enum class Deformation { Translation, UniformScale, SmoothBump };

/// Recipe for a synthetic snapshot-matching instance with a known
/// ground-truth deformation.
struct SyntheticSpec {
  BaseShape base_shape = BaseShape::Sphere;
  int n_points = 50;    // initial grid (actual count may round to the
  int m_points = 50;    // nearest constructible mesh)
  int n_snapshots = 3;  // L
  Deformation deformation = Deformation::SmoothBump;
  double magnitude = 0.3;
  double noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticProblem {
  SnapshotProblem problem;
  Trajectory ground_truth;  // initial samples under the exact deformation
};

SyntheticProblem generate(const SyntheticSpec& spec);

/// Closed triangulated latitude/longitude sphere with roughly n vertices.
SurfaceGrid make_sphere(int n, double radius = 1.0,
                        const Eigen::Vector3d& center = Eigen::Vector3d::Zero());

/// Triangulated planar sheet on [0,1]^2 with a gentle height profile.
SurfaceGrid make_open_sheet(int n);

BaseShape parse_base_shape(const std::string& name);
Deformation parse_deformation(const std::string& name);
std::string to_string(BaseShape s);
std::string to_string(Deformation d);

}  // namespace dsm
