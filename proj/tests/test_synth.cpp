#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsm/synth.hpp"

using namespace dsm;

TEST_CASE("sphere generator produces a closed triangulation near the request") {
  for (int n : {20, 50, 166, 317, 655}) {
    const SurfaceGrid s = make_sphere(n);
    CHECK(std::abs(double(s.size()) - n) <= 0.25 * n + 2);
    CHECK(s.has_triangles());
    CHECK_NOTHROW(s.validate());
    // Closed surface: Euler characteristic V - E + F = 2 with E = 3F/2.
    CHECK(2 * int(s.triangles.size()) ==
          4 * (int(s.size()) - 2));
    for (Eigen::Index i = 0; i < s.size(); ++i)
      CHECK(s.points.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("open sheet stays on the unit square footprint") {
  const SurfaceGrid s = make_open_sheet(49);
  CHECK(s.size() == 49);
  CHECK(s.has_triangles());
  CHECK(s.points.col(0).minCoeff() >= 0.0);
  CHECK(s.points.col(0).maxCoeff() <= 1.0);
  CHECK(s.points.col(1).minCoeff() >= 0.0);
  CHECK(s.points.col(1).maxCoeff() <= 1.0);
}

TEST_CASE("generated problems are well-formed") {
  SyntheticSpec spec;
  spec.n_points = 50;
  spec.m_points = 40;
  spec.n_snapshots = 3;
  SyntheticProblem sp = generate(spec);
  // Kernel scales are left at zero for the solver to derive; fill them so the
  // structural validation can run.
  sp.problem.kernels.sigma_v = sp.problem.kernels.sigma_d = 1.0;
  CHECK_NOTHROW(sp.problem.validate());
  CHECK(sp.problem.targets.size() == 3);
  CHECK(sp.problem.time.times.size() == 4);
  CHECK(sp.ground_truth.states.size() == 4);
  CHECK((sp.ground_truth.states[0].points - sp.problem.initial.points)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("translation moves targets by exact fractions of the magnitude") {
  SyntheticSpec spec;
  spec.deformation = Deformation::Translation;
  spec.magnitude = 0.6;
  spec.n_snapshots = 3;
  spec.n_points = spec.m_points = 30;
  const SyntheticProblem sp = generate(spec);
  const Points& base = sp.problem.initial.points;
  for (int k = 1; k <= 3; ++k) {
    Points expect = base;
    expect.col(0).array() += 0.6 * k / 3.0;
    CHECK((sp.ground_truth.states[k].points - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("uniform scale reaches the requested factor at the last snapshot") {
  SyntheticSpec spec;
  spec.deformation = Deformation::UniformScale;
  spec.magnitude = 1.2;
  spec.n_snapshots = 2;
  spec.n_points = spec.m_points = 30;
  const SyntheticProblem sp = generate(spec);
  const Points& base = sp.problem.initial.points;
  const Eigen::RowVector3d centroid = base.colwise().mean();
  Points expect = base;
  for (Eigen::Index i = 0; i < base.rows(); ++i)
    expect.row(i) = centroid + 1.2 * (base.row(i) - centroid);
  CHECK((sp.ground_truth.states[2].points - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("noise is seeded and reproducible") {
  SyntheticSpec spec;
  spec.noise = 0.01;
  spec.seed = 42;
  const SyntheticProblem a = generate(spec);
  const SyntheticProblem b = generate(spec);
  for (size_t k = 0; k < a.problem.targets.size(); ++k)
    CHECK((a.problem.targets[k].points - b.problem.targets[k].points)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  spec.seed = 43;
  const SyntheticProblem c = generate(spec);
  CHECK((a.problem.targets[0].points - c.problem.targets[0].points)
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("noise free targets equal the ground truth when grids match") {
  SyntheticSpec spec;
  spec.n_points = spec.m_points = 50;
  spec.noise = 0.0;
  const SyntheticProblem sp = generate(spec);
  for (size_t k = 0; k < sp.problem.targets.size(); ++k)
    CHECK((sp.problem.targets[k].points - sp.ground_truth.states[k + 1].points)
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("shape and deformation names round trip") {
  for (BaseShape s : {BaseShape::Sphere, BaseShape::Ellipsoid, BaseShape::OpenSheet})
    CHECK(parse_base_shape(to_string(s)) == s);
  for (Deformation d :
       {Deformation::Translation, Deformation::UniformScale, Deformation::SmoothBump})
    CHECK(parse_deformation(to_string(d)) == d);
  CHECK_THROWS_AS(parse_base_shape("torus"), ValidationError);
  CHECK_THROWS_AS(parse_deformation("twist"), ValidationError);
}

TEST_CASE("spec validation") {
  SyntheticSpec spec;
  spec.n_points = 2;
  CHECK_THROWS_AS(generate(spec), ValidationError);
  spec = SyntheticSpec{};
  spec.noise = -0.1;
  CHECK_THROWS_AS(generate(spec), ValidationError);
}
