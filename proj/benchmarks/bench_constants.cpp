#include <benchmark/benchmark.h>

#include "logwave/varconst.hpp"

using namespace logwave;

namespace {

Problem problem_with(int modes, double q) {
  GridOptions go;
  go.n_modes = modes;
  Exponents ex;
  ex.q = q;
  return Problem(DomainGrid(go), Diffusivity::constant(1.0), TimeCoefficient::exp_decay(2.0, 1.0, 1.0), ex);
}

}  // namespace

static void BM_embedding_K(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  const Problem problem = problem_with(modes, 3.0);
  OptimizerSettings s;
  s.restarts = 4;
  for (auto _ : state)
    benchmark::DoNotOptimize(embedding_K(problem.grid(), problem.stiffness(), 3.5, s).value);
}
BENCHMARK(BM_embedding_K)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_mountain_pass_lambda(benchmark::State& state) {
  const Problem problem = problem_with(32, 3.0);
  Vector u = Vector::Zero(32);
  for (int j = 0; j < 32; ++j) u[j] = 1.0 / (j + 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(mountain_pass_lambda(problem, u, 1.0));
}
BENCHMARK(BM_mountain_pass_lambda);

static void BM_compute_geometry(benchmark::State& state) {
  const Problem problem = problem_with(16, 3.0);
  GeometrySettings g;
  g.gamma.points = 16;
  g.optimizer.restarts = 4;
  g.optimizer.threads = static_cast<int>(state.range(0));
  g.d_samples = 16;
  for (auto _ : state) benchmark::DoNotOptimize(compute_geometry(problem, g).M);
}
BENCHMARK(BM_compute_geometry)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_epsilon_prime(benchmark::State& state) {
  const Thm52Constants c{4.0, 0.0, 1.0, 1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(epsilon_prime(c).value);
}
BENCHMARK(BM_epsilon_prime);

BENCHMARK_MAIN();
