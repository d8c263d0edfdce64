#include "dsm/strain.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>

namespace dsm {

double triangle_area(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                     const Eigen::Vector3d& p3) {
  return 0.5 * (p2 - p1).cross(p3 - p1).norm();
}

StrainField strain_intensity(const SurfaceGrid& reference, const SurfaceGrid& deformed) {
  reference.validate();
  deformed.validate();
  if (!reference.has_triangles())
    throw ValidationError("strain_intensity: reference grid carries no triangulation");
  if (deformed.size() != reference.size())
    throw ValidationError("strain_intensity: grids differ in point count");

  const size_t n = static_cast<size_t>(reference.size());
  std::vector<double> ref_area(n, 0.0), def_area(n, 0.0);
  std::vector<bool> touched(n, false);

  for (const auto& tri : reference.triangles) {
    const double a = triangle_area(reference.points.row(tri[0]).transpose(),
                                   reference.points.row(tri[1]).transpose(),
                                   reference.points.row(tri[2]).transpose());
    const double b = triangle_area(deformed.points.row(tri[0]).transpose(),
                                   deformed.points.row(tri[1]).transpose(),
                                   deformed.points.row(tri[2]).transpose());
    for (int v : tri) {
      ref_area[v] += a;
      def_area[v] += b;
      touched[v] = true;
    }
  }
  for (size_t i = 0; i < n; ++i)
    if (!touched[i])
      throw ValidationError("strain_intensity: vertex " + std::to_string(i) +
                            " belongs to no triangle");

  StrainField field;
  field.values.assign(n, 0.0);
  field.defined.assign(n, true);
  for (size_t i = 0; i < n; ++i) {
    if (ref_area[i] > 0.0) {
      field.values[i] = std::abs(std::sqrt(def_area[i] / ref_area[i]) - 1.0);
    } else {
      field.defined[i] = false;  // degenerate patch: reported, not zeroed
      field.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return field;
}

std::vector<double> strain_quantiles(const StrainField& field,
                                     const std::vector<double>& quantiles) {
  std::vector<double> defined;
  defined.reserve(field.size());
  for (size_t i = 0; i < field.size(); ++i)
    if (field.defined[i]) defined.push_back(field.values[i]);
  if (defined.empty())
    throw ValidationError("strain_quantiles: no defined strain values");

  std::vector<double> out;
  out.reserve(quantiles.size());
  for (double q : quantiles) out.push_back(quantile(defined, q));
  return out;
}

}  // namespace dsm
