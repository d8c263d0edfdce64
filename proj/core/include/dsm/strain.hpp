#pragma once

#include <vector>

#include "dsm/surface.hpp"

namespace dsm {

/// Per-vertex isotropic strain intensity |sqrt(B/A) - 1| where A and B are
/// the one-ring patch areas around the vertex on the reference and deformed
/// grids. Vertices whose reference patch area vanishes carry defined=false.
struct StrainField {
  std::vector<double> values;
  std::vector<bool> defined;

  size_t size() const { return values.size(); }
};

double triangle_area(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                     const Eigen::Vector3d& p3);

/// Both grids must share the reference triangulation and every vertex must
/// belong to at least one triangle.
StrainField strain_intensity(const SurfaceGrid& reference, const SurfaceGrid& deformed);

/// Empirical quantiles of the defined strain values.
std::vector<double> strain_quantiles(const StrainField& field,
                                     const std::vector<double>& quantiles);

}  // namespace dsm
