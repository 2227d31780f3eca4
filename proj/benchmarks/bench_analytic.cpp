#include <benchmark/benchmark.h>

#include "waveqed/analytic.hpp"

using namespace waveqed;

namespace {

void BM_HierarchyIntegrate(benchmark::State& state) {
    const int photons = static_cast<int>(state.range(0));
    const auto pulse = PulseSpec::rect(2.0, photons);
    const auto grid = default_grid(pulse, 0.005);
    for (auto _ : state) {
        auto res = analytic::hierarchy_integrate(EmitterParams::chiral(), pulse, grid);
        benchmark::DoNotOptimize(res.top_population().data());
    }
    state.SetItemsProcessed(state.iterations() * grid.n_steps);
}
BENCHMARK(BM_HierarchyIntegrate)->Arg(1)->Arg(2);

void BM_G1Qrt(benchmark::State& state) {
    const auto pulse = PulseSpec::rect(2.0, 1);
    TimeGrid grid(17.0 / static_cast<double>(state.range(0)),
                  static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto g1 = analytic::g1_qrt(EmitterParams::chiral(), pulse, grid);
        benchmark::DoNotOptimize(g1.n_cells());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_G1Qrt)->Arg(1000)->Arg(2000)->Arg(3400)->Complexity();

}  // namespace
