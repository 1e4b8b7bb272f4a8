#include <benchmark/benchmark.h>

// The packaged benchmark_main archive carries LTO bytecode from another
// compiler release, so main lives here.
BENCHMARK_MAIN();
