// Serial reference path against the OpenMP path on the ensemble kernels.
#include <benchmark/benchmark.h>

#include <memory>

#include "liouvlab/covariant.hpp"
#include "liouvlab/liouville.hpp"

using namespace liouvlab;

namespace {

EnsembleDynamics make_dynamics(Exec exec, int length, int realizations) {
  DisorderModel m;
  m.v_plus_max = 1.0;
  RVector e(1);
  e << 0.1;
  auto g = std::make_shared<const LatticeGeometry>(std::vector<int>{length}, Boundary::open);
  return EnsembleDynamics(g, m, FieldProfile(e, 1.0), 1, realizations, EnsembleDynamics::Settings{-4.0, 0.0, 64}, exec);
}

EquilibriumSpec fermi() {
  EquilibriumSpec s;
  s.fermi_energy = 5.5;
  return s;
}

void superpropagator_kernel(benchmark::State& state, Exec exec) {
  const auto dyn = make_dynamics(exec, static_cast<int>(state.range(0)), 8);
  const auto z = equilibrium_state(fermi(), dyn);
  for (auto _ : state) benchmark::DoNotOptimize(superpropagator(dyn, 0.0, -3.3, z));
}

void duhamel_kernel(benchmark::State& state, Exec exec) {
  const auto dyn = make_dynamics(exec, static_cast<int>(state.range(0)), 8);
  const auto z = equilibrium_state(fermi(), dyn);
  DuhamelOptions opt;
  opt.t_min = -4.0;
  for (auto _ : state) benchmark::DoNotOptimize(duhamel_rho(dyn, z, {0.0}, opt));
}

void norms_kernel(benchmark::State& state, Exec exec) {
  const auto dyn = make_dynamics(exec, static_cast<int>(state.range(0)), 32);
  const auto z = equilibrium_state(fermi(), dyn);
  for (auto _ : state) benchmark::DoNotOptimize(norms(z, exec));
}

} // namespace

BENCHMARK_CAPTURE(superpropagator_kernel, serial, Exec::serial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(superpropagator_kernel, parallel, Exec::parallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(duhamel_kernel, serial, Exec::serial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(duhamel_kernel, parallel, Exec::parallel)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(norms_kernel, serial, Exec::serial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(norms_kernel, parallel, Exec::parallel)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
