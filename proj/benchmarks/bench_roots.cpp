#include <benchmark/benchmark.h>

#include <holoflow/xi_surface.hpp>

#include "bench_support.hpp"

using holoflow::Complex;

static void BM_RootsOfPm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto P = holoflow::PmPolynomial::from_table(bench_zeros(), m, Complex(1.0, 20.0), Complex(0.3, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(holoflow::roots_of_Pm(P));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RootsOfPm)->RangeMultiplier(2)->Range(2, 64)->Complexity();

static void BM_TraceSurface(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto lattice = holoflow::TimeLattice::linspace(-1.0, 1.0, 41, -3.0, 3.0, 49);
  for (auto _ : state) {
    benchmark::DoNotOptimize(holoflow::trace_surface(bench_zeros(), m, Complex(2.0, 10.0), lattice));
  }
  state.counters["nodes"] = static_cast<double>(lattice.size());
}
BENCHMARK(BM_TraceSurface)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_EvaluateLog(benchmark::State& state) {
  const auto P = holoflow::PmPolynomial::from_table(bench_zeros(), 100, Complex(1.0, 50.0));
  Complex z(0.7, 40.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(P.evaluate_log(z));
    z += Complex(1e-9, 0.0);
  }
}
BENCHMARK(BM_EvaluateLog);
