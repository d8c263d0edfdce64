#include <benchmark/benchmark.h>

#include <random>

#include "dsm/osa.hpp"
#include "dsm/synth.hpp"

using namespace dsm;

namespace {

Points random_points(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Points p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) p(i, c) = u(rng);
  return p;
}

void bm_kernel_matrix(benchmark::State& state) {
  const Points p = random_points(int(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(p, 0.8));
}
BENCHMARK(bm_kernel_matrix)->Arg(64)->Arg(256)->Arg(655);

void bm_dsd(benchmark::State& state) {
  const int n = int(state.range(0));
  const Points x = random_points(n, 2);
  SurfaceGrid target;
  target.points = random_points(n, 3);
  const DisparityWorkspace ws(target, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dsd(x, ws));
}
BENCHMARK(bm_dsd)->Arg(64)->Arg(256)->Arg(655);

void bm_dsd_gradient(benchmark::State& state) {
  const int n = int(state.range(0));
  const Points x = random_points(n, 4);
  SurfaceGrid target;
  target.points = random_points(n, 5);
  const DisparityWorkspace ws(target, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dsd_gradient(x, ws));
}
BENCHMARK(bm_dsd_gradient)->Arg(64)->Arg(256)->Arg(655);

SnapshotProblem bump_problem(int n) {
  SyntheticSpec spec;
  spec.n_points = spec.m_points = n;
  spec.n_snapshots = 3;
  spec.magnitude = 0.2;
  return generate(spec).problem;
}

void bm_quadratic_prox(benchmark::State& state) {
  const SnapshotProblem p = bump_problem(int(state.range(0)));
  SolverOptions o;
  o.frozen_u = true;
  OsaSolver solver(p, o);
  const ConsensusState init = solver.initial_state();
  const auto u = solver.dynamics_matrices(init.z_tilde);
  for (auto _ : state)
    benchmark::DoNotOptimize(solver.quadratic_prox(init.z_tilde, u));
}
BENCHMARK(bm_quadratic_prox)->Arg(64)->Arg(166)->Arg(317);

void bm_dr_iterate(benchmark::State& state) {
  const SnapshotProblem p = bump_problem(int(state.range(0)));
  SolverOptions o;
  o.frozen_u = true;
  OsaSolver solver(p, o);
  ConsensusState s = solver.initial_state();
  for (auto _ : state) solver.dr_iterate(s);
}
BENCHMARK(bm_dr_iterate)->Arg(64)->Arg(166);

}  // namespace

BENCHMARK_MAIN();
