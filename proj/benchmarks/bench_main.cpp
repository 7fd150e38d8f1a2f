#include <benchmark/benchmark.h>

// The packaged benchmark_main archive is LTO bytecode; provide main here.
BENCHMARK_MAIN();
