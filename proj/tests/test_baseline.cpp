#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dsm/baseline.hpp"

using namespace dsm;

namespace {

SnapshotProblem bump_problem(int n, int steps) {
  SnapshotProblem p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  p.initial.points.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) p.initial.points(i, c) = u(rng);
  for (int k = 0; k < steps; ++k) {
    SurfaceGrid t;
    t.points = p.initial.points;
    t.points.col(0).array() += 0.05 * (k + 1);
    p.targets.push_back(t);
  }
  p.time.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) p.time.times[k] = 0.1 * k;
  return p;
}

}  // namespace

TEST_CASE("gradient descent monotonically decreases the cost") {
  const SnapshotProblem p = bump_problem(8, 2);
  BaselineOptions o;
  o.max_iterations = 15;
  const SolveReport r = solve_gd(p, o);
  REQUIRE(!r.history.empty());
  for (size_t i = 1; i < r.history.size(); ++i)
    CHECK(r.history[i].cost <= r.history[i - 1].cost);
  CHECK(r.history.back().cost < r.history.front().cost);
}

TEST_CASE("history schema matches the splitting solver's") {
  const SnapshotProblem p = bump_problem(6, 3);
  BaselineOptions o;
  o.max_iterations = 5;
  const SolveReport r = solve_gd(p, o);
  for (size_t i = 0; i < r.history.size(); ++i) {
    CHECK(r.history[i].iteration == int(i) + 1);
    CHECK(r.history[i].hausdorff.size() == 3);
    CHECK(r.history[i].consensus_gap == 0.0);
  }
  CHECK(r.trajectory.states.size() == 4);
  CHECK(r.controls.alphas.size() == 3);
}

TEST_CASE("zero deformation stops on the gradient tolerance") {
  SnapshotProblem p = bump_problem(6, 1);
  p.targets[0].points = p.initial.points;
  BaselineOptions o;
  o.max_iterations = 30;
  const SolveReport r = solve_gd(p, o);
  CHECK(r.termination == Termination::GradientTol);
  for (const auto& a : r.controls.alphas)
    CHECK(a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("baseline option validation") {
  const SnapshotProblem p = bump_problem(4, 1);
  BaselineOptions o;
  o.armijo_c = 1.5;
  CHECK_THROWS_AS(solve_gd(p, o), ValidationError);
  o = BaselineOptions{};
  o.initial_step = 0.0;
  CHECK_THROWS_AS(solve_gd(p, o), ValidationError);
}

TEST_CASE("baseline is deterministic") {
  const SnapshotProblem p = bump_problem(7, 2);
  BaselineOptions o;
  o.max_iterations = 10;
  const SolveReport a = solve_gd(p, o);
  const SolveReport b = solve_gd(p, o);
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i)
    CHECK(a.history[i].cost == b.history[i].cost);
}
