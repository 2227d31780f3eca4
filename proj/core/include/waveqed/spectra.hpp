#pragma once

#include <vector>

#include "waveqed/types.hpp"

namespace waveqed::spectra {

/// Real-valued spectrogram sampled on (time slice) x (omega) with
/// omega measured relative to the pulse carrier in units of gamma.
struct SpectrogramGrid {
    std::vector<double> omegas;
    std::vector<double> times;
    std::vector<double> data;  // row-major [time][omega]

    double& at(std::size_t it, std::size_t iw) { return data[it * omegas.size() + iw]; }
    double at(std::size_t it, std::size_t iw) const { return data[it * omegas.size() + iw]; }
    std::size_t n_times() const { return times.size(); }
    std::size_t n_omegas() const { return omegas.size(); }
};

/// Default frequency grid: 401 points over [-10, 10] gamma around the carrier.
std::vector<double> default_omegas(double half_width = 10.0, std::size_t n = 401);

/// Cumulative time-dependent spectrum
///   S(w, t) = (1/pi) Re int_0^t dt' int_0^{t-t'} dtau G1(t', t'+tau) e^{i w tau},
/// evaluated by iterated trapezoid sums on the stored triangle. Column prefix
/// sums are advanced incrementally so every kernel cell is touched once
/// regardless of how many output slices are requested. The first output slice
/// is t = 0 (identically zero). The 1/pi normalization makes the chiral
/// 1-photon long-time limit equal the unit-normalized input spectrum.
SpectrogramGrid time_dependent_spectrum(const G1Matrix& g1, std::vector<double> omegas,
                                        std::size_t time_stride = 0, int n_threads = 1);

/// Time-dependent spectral intensity
///   I(w, t) = (1/pi) Re int_0^inf dtau G1(t, t+tau) e^{i w tau},
/// with the tau integral truncated at the grid end (the grid must extend far
/// enough past the pulse for the decaying tail to be negligible).
SpectrogramGrid spectral_intensity(const G1Matrix& g1, std::vector<double> omegas,
                                   std::size_t time_stride = 0, int n_threads = 1);

/// Trapezoid integral of I(w, t) over the whole run, one value per omega.
/// `time_stride` must resolve the e^{i w t} oscillation of the integrand;
/// see identity_safe_stride.
std::vector<double> integrate_intensity(const G1Matrix& g1,
                                        const std::vector<double>& omegas,
                                        std::size_t time_stride = 1, int n_threads = 1);

/// Largest row stride for which the integrated intensity resolves the fastest
/// oscillation on the omega grid (and the gamma-scale dynamics).
std::size_t identity_safe_stride(const TimeGrid& grid, double omega_max);

/// Long-time spectrum S(w) = S(w, t_end): the final cumulative slice.
std::vector<double> stationary_spectrum_numeric(const G1Matrix& g1,
                                                const std::vector<double>& omegas,
                                                int n_threads = 1);

}  // namespace waveqed::spectra
