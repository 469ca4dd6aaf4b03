#include "panelms/cluster.hpp"
#include "panelms/critvals.hpp"
#include "panelms/lrv.hpp"
#include "panelms/multiscale.hpp"
#include "panelms/simulate.hpp"

#include <benchmark/benchmark.h>

using namespace panelms;

namespace {

DgpSpec spec(std::size_t N, std::size_t T) {
    DgpSpec s;
    s.N = N;
    s.T = T;
    s.D = 2;
    s.unit_curves.assign(N, CoefficientFunction{{Curve{{CurveTerm::constant(1.0)}},
                                                 Curve{{CurveTerm::linear(0.5, -0.5)}}}});
    s.ar = 0.3;
    s.seed = 11;
    return s;
}

void BM_SimulatePhi(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    const Grid grid = build_grid_application(T);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_phi(T, 5, 2, grid, SmoothingKernel{}, 200, 1, 1));
    }
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SimulatePhi)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_LocalStats(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    const auto panel = generate_panel(spec(10, T)).panel;
    const Grid grid = build_grid_application(T);
    const auto norm = build_normalizers(estimate_long_run(panel, SmoothingKernel{}, HacConfig{}));
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_local_stats(panel, SmoothingKernel{}, grid, norm, 1));
    }
}
BENCHMARK(BM_LocalStats)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LongRun(benchmark::State& state) {
    const auto T = static_cast<std::size_t>(state.range(0));
    const auto panel = generate_panel(spec(10, T)).panel;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_long_run(panel, SmoothingKernel{}, HacConfig{}));
    }
}
BENCHMARK(BM_LongRun)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Cluster(benchmark::State& state) {
    const auto N = static_cast<std::size_t>(state.range(0));
    const auto panel = generate_panel(spec(N, 200)).panel;
    const Grid grid = build_grid_application(200);
    const auto table = compute_local_stats(
        panel, SmoothingKernel{}, grid, build_normalizers(estimate_long_run(panel, SmoothingKernel{}, HacConfig{})), 1);
    const auto d = dissimilarity_matrix(table);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hac_cluster(d, Linkage::Complete));
    }
}
BENCHMARK(BM_Cluster)->Arg(20)->Arg(60);

}  // namespace
BENCHMARK_MAIN();
