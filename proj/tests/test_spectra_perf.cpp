#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "waveqed/analytic.hpp"
#include "waveqed/spectra.hpp"

using namespace waveqed;

// A spectrogram job with N_t = 2000 rows and 401 frequencies must finish in
// well under a minute on one core; the incremental column-prefix scheme keeps
// the kernel pass at O(N^2) plus O(slices * N * N_omega) assembly. A naive
// recomputation of the full triangle per output slice would be ~N/2 times
// more work and blows the budget by orders of magnitude.
TEST(SpectraPerformance, FigureClassJobUnderBudget) {
    const auto pulse = PulseSpec::rect(2.0, 1);
    TimeGrid grid(0.0085, 2000);
    const auto g1 =
        analytic::g1_qrt(EmitterParams::chiral(), pulse, grid);
    const auto omegas = spectra::default_omegas(10.0, 401);

    const auto t0 = std::chrono::steady_clock::now();
    const auto S = spectra::time_dependent_spectrum(g1, omegas, 10, 1);
    const auto I = spectra::spectral_intensity(g1, omegas, 10, 1);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    EXPECT_EQ(S.n_omegas(), 401u);
    EXPECT_GT(S.n_times(), 100u);
    EXPECT_GT(I.n_times(), 100u);
    EXPECT_LT(secs, 60.0) << "spectrogram job exceeded the single-core budget";
}
