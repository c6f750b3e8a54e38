#include <benchmark/benchmark.h>

#include "logwave/dynamics.hpp"
#include "logwave/log.hpp"

using namespace logwave;

namespace {

Problem problem_with(int modes, double p) {
  GridOptions go;
  go.n_modes = modes;
  Exponents ex;
  ex.q = 3.0;
  ex.p = p;
  return Problem(DomainGrid(go), Diffusivity::linear(1.0, 0.3), TimeCoefficient::exp_decay(2.0, 1.0, 1.0), ex);
}

ModalState smooth_state(int modes) {
  ModalState s = ModalState::zero(modes);
  for (int j = 0; j < modes; ++j) {
    s.u[j] = 0.5 / ((j + 1.0) * (j + 1.0));
    s.v[j] = 0.1 / (j + 1.0);
  }
  return s;
}

}  // namespace

// One evaluate-apply-project pass of the right-hand side.
static void BM_galerkin_rhs(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  const Problem problem = problem_with(modes, 1.0);
  const ModalState s = smooth_state(modes);
  for (auto _ : state) {
    StateDerivative d = galerkin_rhs(problem, s);
    benchmark::DoNotOptimize(d.dv.data());
  }
  state.SetComplexityN(modes);
}
BENCHMARK(BM_galerkin_rhs)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_make_record(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  const Problem problem = problem_with(modes, 0.0);
  const ModalState s = smooth_state(modes);
  for (auto _ : state) benchmark::DoNotOptimize(make_record(problem, s).E);
}
BENCHMARK(BM_make_record)->RangeMultiplier(2)->Range(16, 256);

// A full W-start run to t = 10; dominated by the stability cap on dt.
static void BM_integrate_global(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  const Problem problem = problem_with(modes, 0.0);
  ModalState s = ModalState::zero(modes);
  s.u[0] = 0.1;
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  int steps = 0;
  for (auto _ : state) {
    const Trajectory tr = integrate(problem, s, cfg);
    steps = tr.accepted_steps;
    benchmark::DoNotOptimize(tr.records.back().E);
  }
  state.counters["steps"] = steps;
}
BENCHMARK(BM_integrate_global)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
