#include <benchmark/benchmark.h>

#include "waveqed/mps.hpp"

using namespace waveqed;
using namespace waveqed::mps;

namespace {

void BM_EvolveChiralOnePhoton(benchmark::State& state) {
    const auto pulse = PulseSpec::rect(2.0, 1);
    TimeGrid grid(17.0 / static_cast<double>(state.range(0)),
                  static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto mps_state = build_input_1photon(pulse, grid, 1);
        auto rec = evolve(mps_state, EmitterParams::chiral(), grid, TruncationPolicy{});
        benchmark::DoNotOptimize(rec.n_tls.values.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvolveChiralOnePhoton)->Arg(1000)->Arg(3400);

void BM_EvolveSymmetricTwoPhoton(benchmark::State& state) {
    const auto pulse = PulseSpec::rect(2.0, 2);
    TimeGrid grid(17.0 / static_cast<double>(state.range(0)),
                  static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto mps_state = build_input_2photon(pulse, grid, 2);
        auto rec = evolve(mps_state, EmitterParams::symmetric(), grid, TruncationPolicy{});
        benchmark::DoNotOptimize(rec.n_tls.values.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvolveSymmetricTwoPhoton)->Arg(500)->Arg(1000);

void BM_CorrelatorMatrix(benchmark::State& state) {
    const auto pulse = PulseSpec::rect(2.0, 1);
    TimeGrid grid(17.0 / static_cast<double>(state.range(0)),
                  static_cast<std::size_t>(state.range(0)));
    auto mps_state = build_input_1photon(pulse, grid, 1);
    evolve(mps_state, EmitterParams::chiral(), grid, TruncationPolicy{});
    for (auto _ : state) {
        auto g1 = correlator_matrix(mps_state, 1);
        benchmark::DoNotOptimize(g1.n_cells());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CorrelatorMatrix)->Arg(500)->Arg(1000)->Arg(2000)->Complexity();

}  // namespace
