#include "cusparity/continuation.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/numerics.hpp"
#include "cusparity/szparity.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace cusparity;

static void BM_Spectrum(benchmark::State& state) {
    const int n = int(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(spectrum(A));
}
BENCHMARK(BM_Spectrum)->Arg(2)->Arg(3)->Arg(8)->Arg(32);

static void BM_FindEquilibria(benchmark::State& state) {
    const FamilySpec f = builtin("quintic3");
    const Settings s;
    std::uint64_t stream = 0;
    for (auto _ : state) benchmark::DoNotOptimize(find_equilibria(f, {-1.0, 0.2}, s, stream++, -1));
}
BENCHMARK(BM_FindEquilibria);

static void BM_FoldCurve(benchmark::State& state) {
    const FamilySpec f = builtin(state.range(0) == 0 ? "cusp1" : "quintic3");
    const Settings s;
    const auto curves = enumerate_fold_curves(f, s);
    const FoldPoint seed = curves.front().points[curves.front().points.size() / 3];
    for (auto _ : state) benchmark::DoNotOptimize(continue_fold_curve(f, seed, s));
}
BENCHMARK(BM_FoldCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Enumerate(benchmark::State& state) {
    const FamilySpec f = builtin("cusp1");
    const Settings s;
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_fold_curves(f, s));
}
BENCHMARK(BM_Enumerate)->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& state) {
    const FamilySpec f = builtin("cusp1");
    const Settings s;
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(f, s));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
