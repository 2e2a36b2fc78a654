#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qring/emission.hpp"
#include "qring/fft.hpp"
#include "qring/propagator.hpp"
#include "qring/units.hpp"

using namespace qring;

namespace {

void BM_Fft2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Fft2D plan(n, n);
  ComplexField f(static_cast<std::size_t>(n) * n, cplx(1.0, 0.5));
  for (auto _ : state) {
    plan.forward(f.data());
    plan.backward(f.data());
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_Fft2D)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

// One Strang step of a single orbital under the field, per grid size.
void BM_OrbitalStep(benchmark::State& state) {
  Material mat;
  RingStack stack;
  stack.rings = {RingSpec::from_transition(150.0, 2.5, 0, 3, 40.0, mat)};
  GridSpec grid;
  grid.nx = grid.ny = static_cast<int>(state.range(0));
  grid.dt = 10.0;
  PulseSpec pulse;
  pulse.coupling_scale = 1e-4;
  PropagatorOptions opt;
  opt.threads = 1;
  opt.schedule = RelaxationSchedule::Off;
  Propagator prop(grid, stack, mat, pulse, opt);
  auto orbitals = occupy(solve_stationary(stack, mat, 0, 0, 1, {0.1, 250.0}), mat);
  auto s = prop.initialize(orbitals);
  s.time = 1.0;  // mid-pulse
  for (auto _ : state) {
    prop.step(s);
    s.time = 1.0;
  }
}
BENCHMARK(BM_OrbitalStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Stokes(benchmark::State& state) {
  const std::size_t n = 1201;
  const double dt = 0.01;
  std::vector<double> ax(n), ay(n);
  for (std::size_t i = 0; i < n; ++i) {
    ax[i] = std::cos(2.0 * units::pi * 0.6 * dt * i);
    ay[i] = std::sin(2.0 * units::pi * 0.6 * dt * i);
  }
  SpectrogramSpec spec;
  spec.t_max = 12.0;
  spec.n_freq = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stokes(ax, ay, 0.0, dt, spec));
}
BENCHMARK(BM_Stokes)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
