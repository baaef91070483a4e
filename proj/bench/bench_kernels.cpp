// Serial vs OpenMP GEMM throughput. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "laco/kernels.hpp"

namespace {

using laco::kernels::GemmDims;

std::vector<double> random_matrix(std::size_t size, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(size);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <void (*Gemm)(GemmDims, std::span<const double>, std::span<const double>, std::span<double>, bool)>
void run(benchmark::State& state, bool transpose_a) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_matrix(m * k, 1);
  const auto b = random_matrix(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    Gemm({m, k, n}, a, b, c, false);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.counters["GFLOPS"] = benchmark::Counter(2.0 * static_cast<double>(m * k * n),
                                                benchmark::Counter::kIsIterationInvariantRate,
                                                benchmark::Counter::kIs1000);
  (void)transpose_a;
}

void serial_nn(benchmark::State& s) { run<laco::kernels::serial::gemm_nn>(s, false); }
void parallel_nn(benchmark::State& s) { run<laco::kernels::parallel::gemm_nn>(s, false); }
void serial_tn(benchmark::State& s) { run<laco::kernels::serial::gemm_tn>(s, true); }
void parallel_tn(benchmark::State& s) { run<laco::kernels::parallel::gemm_tn>(s, true); }
void serial_nt(benchmark::State& s) { run<laco::kernels::serial::gemm_nt>(s, false); }
void parallel_nt(benchmark::State& s) { run<laco::kernels::parallel::gemm_nt>(s, false); }

// Shapes seen in training: sequence x hidden x hidden, sequence x hidden x
// ffn, and a square case.
#define SHAPES ->Args({32, 128, 128})->Args({32, 128, 512})->Args({128, 128, 512})->Args({256, 256, 256})

BENCHMARK(serial_nn) SHAPES;
BENCHMARK(parallel_nn) SHAPES;
BENCHMARK(serial_tn) SHAPES;
BENCHMARK(parallel_tn) SHAPES;
BENCHMARK(serial_nt) SHAPES;
BENCHMARK(parallel_nt) SHAPES;

}  // namespace

BENCHMARK_MAIN();
