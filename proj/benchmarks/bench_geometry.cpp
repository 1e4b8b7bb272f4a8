#include <benchmark/benchmark.h>

#include <holoflow/geometry.hpp>

#include "bench_support.hpp"

using holoflow::Complex;

static void BM_MetricFrame(benchmark::State& state) {
  const auto h = holoflow::build_xi_approx(bench_zeros(), 20, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(holoflow::metric_frame(h, Complex(1.3, 17.0)));
}
BENCHMARK(BM_MetricFrame);

static void BM_CurvatureCheck(benchmark::State& state) {
  const auto h = holoflow::build_xi_approx(bench_zeros(), 4, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(holoflow::curvature_flatness_check(h, Complex(2.0, 10.0)));
}
BENCHMARK(BM_CurvatureCheck);
