#include <benchmark/benchmark.h>

#include <holoflow/flow_engine.hpp>
#include <holoflow/hamiltonian.hpp>

#include "bench_support.hpp"

using holoflow::Complex;

static void BM_IntegrateRayCosh(benchmark::State& state) {
  const auto h = holoflow::HoloFunction::cosh_shift();
  for (auto _ : state) {
    benchmark::DoNotOptimize(holoflow::integrate_ray(h, Complex(0.9, 1.5), {0.0, 2.0 * holoflow::kPi}));
  }
}
BENCHMARK(BM_IntegrateRayCosh);

static void BM_IntegrateNewtonXi(benchmark::State& state) {
  const auto h = holoflow::build_xi_approx(bench_zeros(), static_cast<std::size_t>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(holoflow::integrate_newton(h, Complex(2.0, 10.0), {0.0, 6.0}));
}
BENCHMARK(BM_IntegrateNewtonXi)->Arg(4)->Arg(40);

static void BM_HamiltonianOrbit(benchmark::State& state) {
  const auto h = holoflow::build_xi_approx(bench_zeros(), 4, 1.0);
  const Complex rho = bench_zeros().rho(1);
  const double period = holoflow::orbit_period_analytic(h, rho).real();
  const auto b0 = holoflow::SensitivityBundle::initial(rho + 0.2, 1.0, 1.0, Complex(0.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(holoflow::integrate_hamiltonian(h, b0, {0.0, period}));
}
BENCHMARK(BM_HamiltonianOrbit)->Unit(benchmark::kMicrosecond);

static void BM_ClassifySeparatrix(benchmark::State& state) {
  const auto h = holoflow::HoloFunction::cosh_shift();
  for (auto _ : state) benchmark::DoNotOptimize(holoflow::classify_separatrix(h, Complex(0.3, holoflow::kPi)));
}
BENCHMARK(BM_ClassifySeparatrix)->Unit(benchmark::kMicrosecond);
