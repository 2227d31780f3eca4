#include <benchmark/benchmark.h>

#include "waveqed/analytic.hpp"
#include "waveqed/spectra.hpp"

using namespace waveqed;

namespace {

G1Matrix make_kernel(std::size_t n_steps) {
    const auto pulse = PulseSpec::rect(2.0, 1);
    TimeGrid grid(17.0 / static_cast<double>(n_steps), n_steps);
    return analytic::g1_qrt(EmitterParams::chiral(), pulse, grid);
}

void BM_TimeDependentSpectrum(benchmark::State& state) {
    const auto g1 = make_kernel(static_cast<std::size_t>(state.range(0)));
    const auto omegas = spectra::default_omegas(10.0, 401);
    for (auto _ : state) {
        auto S = spectra::time_dependent_spectrum(g1, omegas, 10, 1);
        benchmark::DoNotOptimize(S.data.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TimeDependentSpectrum)->Arg(500)->Arg(1000)->Arg(2000)->Complexity();

// Reference point for the rejected approach: recomputing the full triangle
// from scratch for every output slice. Kept at small sizes; the scaling gap
// against the incremental scheme is the point of the measurement.
void BM_NaivePerSliceRecomputation(benchmark::State& state) {
    const auto g1 = make_kernel(static_cast<std::size_t>(state.range(0)));
    const auto omegas = spectra::default_omegas(10.0, 401);
    const std::size_t n = g1.n_rows();
    for (auto _ : state) {
        double sink = 0.0;
        for (std::size_t m = 9; m < n; m += 10) {
            for (double w : omegas) {
                cd acc{0, 0};
                for (std::size_t j = 0; j <= m; ++j) {
                    cd inner{0, 0};
                    for (std::size_t i = 0; i + j <= m; ++i) inner += g1.at(i, j);
                    acc += inner * std::polar(1.0, w * g1.grid().dt * double(j));
                }
                sink += acc.real();
            }
        }
        benchmark::DoNotOptimize(sink);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NaivePerSliceRecomputation)->Arg(125)->Arg(250)->Complexity();

void BM_SpectralIntensity(benchmark::State& state) {
    const auto g1 = make_kernel(static_cast<std::size_t>(state.range(0)));
    const auto omegas = spectra::default_omegas(10.0, 401);
    for (auto _ : state) {
        auto I = spectra::spectral_intensity(g1, omegas, 10, 1);
        benchmark::DoNotOptimize(I.data.data());
    }
}
BENCHMARK(BM_SpectralIntensity)->Arg(1000)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
