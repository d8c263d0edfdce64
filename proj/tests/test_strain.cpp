#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsm/strain.hpp"
#include "dsm/synth.hpp"

using namespace dsm;

TEST_CASE("triangle area of the unit right triangle") {
  CHECK(triangle_area({0, 0, 0}, {1, 0, 0}, {0, 1, 0}) == doctest::Approx(0.5));
  CHECK(triangle_area({0, 0, 0}, {1, 0, 0}, {2, 0, 0}) == 0.0);
}

TEST_CASE("identity deformation has zero strain everywhere") {
  const SurfaceGrid sphere = make_sphere(60);
  const StrainField f = strain_intensity(sphere, sphere);
  REQUIRE(f.size() == size_t(sphere.size()));
  for (size_t i = 0; i < f.size(); ++i) {
    CHECK(f.defined[i]);
    CHECK(f.values[i] <= 1e-12);
  }
}

TEST_CASE("uniform scaling gives |c - 1| at every vertex") {
  const SurfaceGrid sphere = make_sphere(60);
  for (double c : {0.9, 1.1, 1.2}) {
    SurfaceGrid scaled = sphere;
    scaled.points *= c;
    const StrainField f = strain_intensity(sphere, scaled);
    for (size_t i = 0; i < f.size(); ++i)
      CHECK(f.values[i] == doctest::Approx(std::abs(c - 1.0)).epsilon(1e-10));
  }
}

TEST_CASE("degenerate reference patch is marked undefined, not zero") {
  SurfaceGrid ref;
  ref.points.resize(4, 3);
  // Vertex 3 only belongs to a zero-area triangle (collinear points).
  ref.points << 0, 0, 0, 1, 0, 0, 0, 1, 0, 2, 0, 0;
  ref.triangles.push_back({0, 1, 2});
  ref.triangles.push_back({0, 1, 3});
  SurfaceGrid def = ref;
  def.points.col(0) *= 1.5;
  const StrainField f = strain_intensity(ref, def);
  CHECK(f.defined[2]);
  CHECK_FALSE(f.defined[3]);
  CHECK(std::isnan(f.values[3]));
}

TEST_CASE("vertex outside every triangle is a validation error") {
  SurfaceGrid ref;
  ref.points.resize(4, 3);
  ref.points << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 5, 5;
  ref.triangles.push_back({0, 1, 2});
  CHECK_THROWS_AS(strain_intensity(ref, ref), ValidationError);
}

TEST_CASE("strain requires a triangulated reference") {
  SurfaceGrid ref;
  ref.points.resize(3, 3);
  ref.points << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  CHECK_THROWS_AS(strain_intensity(ref, ref), ValidationError);
}

TEST_CASE("mismatched point counts are rejected") {
  const SurfaceGrid sphere = make_sphere(40);
  SurfaceGrid other = make_sphere(40);
  other.points.conservativeResize(other.points.rows() - 1, 3);
  CHECK_THROWS_AS(strain_intensity(sphere, other), ValidationError);
}

TEST_CASE("strain quantiles skip undefined vertices and interpolate") {
  StrainField f;
  f.values = {0.1, 0.2, std::nan(""), 0.4};
  f.defined = {true, true, false, true};
  const auto q = strain_quantiles(f, {0.0, 0.5, 1.0});
  CHECK(q[0] == doctest::Approx(0.1));
  CHECK(q[1] == doctest::Approx(0.2));
  CHECK(q[2] == doctest::Approx(0.4));
}

TEST_CASE("all-undefined field cannot be summarized") {
  StrainField f;
  f.values = {std::nan("")};
  f.defined = {false};
  CHECK_THROWS_AS(strain_quantiles(f, {0.5}), ValidationError);
}
