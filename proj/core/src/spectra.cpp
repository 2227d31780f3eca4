#include "waveqed/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "waveqed/parallel.hpp"

namespace waveqed::spectra {

namespace {

std::vector<std::size_t> output_slices(std::size_t n, std::size_t stride, std::size_t cap) {
    if (stride == 0) stride = std::max<std::size_t>(1, n / cap);
    std::vector<std::size_t> out;
    for (std::size_t m = stride - 1; m < n; m += stride) out.push_back(m);
    if (out.empty() || out.back() != n - 1) out.push_back(n - 1);
    return out;
}

void check_grid(const G1Matrix& g1) {
    if (g1.n_rows() == 0) throw std::invalid_argument("spectra: empty correlation matrix");
}

}  // namespace

std::vector<double> default_omegas(double half_width, std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = -half_width + 2.0 * half_width * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    return w;
}

SpectrogramGrid time_dependent_spectrum(const G1Matrix& g1, std::vector<double> omegas,
                                        std::size_t time_stride, int n_threads) {
    check_grid(g1);
    const std::size_t n = g1.n_rows();
    const double dt = g1.grid().dt;
    const auto slices = output_slices(n, time_stride, 400);

    // The triangle is summed as the hermitian square
    //   S = (dt^2 / 2 pi) sum_{i,j<=m} u_i u_j K(t_i, t_j) e^{i w (t_j - t_i)}
    // with node weights u = (3/2, 1, .., 1, 1/2): trapezoid on the sampled
    // rows plus a rectangle for the unsampled [0, dt) strip. The sum is a
    // quadratic form in the positive-semidefinite correlation kernel, so the
    // discretized S inherits exact nonnegativity at any step size.
    //
    // Q[slice][j] collects the weighted column prefixes; advancing the plain
    // prefixes touches each stored cell exactly once across all slices.
    std::vector<std::vector<cd>> Q(slices.size());
    std::vector<cd> colP(n, cd{0, 0});
    std::vector<std::size_t> col_end(n, 0);  // accumulated rows per column
    for (std::size_t si = 0; si < slices.size(); ++si) {
        const std::size_t m = slices[si];
        auto& q = Q[si];
        q.assign(m + 1, cd{0, 0});
        for (std::size_t j = 0; j <= m; ++j) {
            const std::size_t r = m - j;  // last row index of column j
            while (col_end[j] <= r) {
                colP[j] += g1.at(col_end[j], j);
                ++col_end[j];
            }
            if (m == 0) {
                q[j] = g1.at(0, 0);  // single node, strip rectangle only
                continue;
            }
            if (j == 0) {
                // diagonal: sum_i u_i^2 G[i][0]
                q[0] = colP[0] + 1.25 * g1.at(0, 0) - 0.75 * g1.at(m, 0);
            } else {
                q[j] = colP[j] + 0.5 * g1.at(0, j) - 0.5 * g1.at(r, j);
                if (j == m) q[j] -= 0.25 * g1.at(0, j);  // u_0 u_m = 3/4
            }
        }
    }

    SpectrogramGrid out;
    out.omegas = std::move(omegas);
    out.times.resize(slices.size() + 1);
    out.times[0] = 0.0;
    for (std::size_t si = 0; si < slices.size(); ++si)
        out.times[si + 1] = g1.grid().t(slices[si]);
    out.data.assign(out.times.size() * out.omegas.size(), 0.0);

    const double scale = dt * dt / (2.0 * std::numbers::pi);
    parallel_for(out.omegas.size(), n_threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t iw = lo; iw < hi; ++iw) {
            const cd rot = std::polar(1.0, out.omegas[iw] * dt);
            for (std::size_t si = 0; si < slices.size(); ++si) {
                const auto& q = Q[si];
                const std::size_t m = slices[si];
                cd phase{1.0, 0.0};
                cd acc{0.0, 0.0};
                for (std::size_t j = 1; j <= m; ++j) {
                    phase *= rot;
                    acc += phase * q[j];
                }
                out.at(si + 1, iw) = scale * (2.0 * acc.real() + q[0].real());
            }
        }
    });
    return out;
}

SpectrogramGrid spectral_intensity(const G1Matrix& g1, std::vector<double> omegas,
                                   std::size_t time_stride, int n_threads) {
    check_grid(g1);
    const std::size_t n = g1.n_rows();
    const double dt = g1.grid().dt;
    if (time_stride == 0) time_stride = std::max<std::size_t>(1, n / 600);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; i += time_stride) rows.push_back(i);

    SpectrogramGrid out;
    out.omegas = std::move(omegas);
    out.times.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) out.times[k] = g1.grid().t(rows[k]);
    out.data.assign(rows.size() * out.omegas.size(), 0.0);

    const double scale = dt / std::numbers::pi;
    parallel_for(out.omegas.size(), n_threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t iw = lo; iw < hi; ++iw) {
            const cd rot = std::polar(1.0, out.omegas[iw] * dt);
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const auto row = g1.row(rows[k]);
                const std::size_t L = row.size();
                cd phase{1.0, 0.0};
                cd acc = 0.5 * row[0];
                for (std::size_t j = 1; j < L; ++j) {
                    phase *= rot;
                    acc += (j + 1 == L ? 0.5 : 1.0) * phase * row[j];
                }
                if (L == 1) acc = cd{0, 0};  // zero-width tau integral
                out.at(k, iw) = scale * acc.real();
            }
        }
    });
    return out;
}

std::vector<double> integrate_intensity(const G1Matrix& g1, const std::vector<double>& omegas,
                                        std::size_t time_stride, int n_threads) {
    auto I = spectral_intensity(g1, omegas, std::max<std::size_t>(1, time_stride), n_threads);
    const std::size_t nt = I.n_times();
    std::vector<double> out(omegas.size(), 0.0);
    if (nt < 2) return out;
    for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
        double acc = I.at(0, iw) * I.times[0];  // rectangle for the [0, t_first) strip
        for (std::size_t k = 0; k + 1 < nt; ++k)
            acc += 0.5 * (I.at(k, iw) + I.at(k + 1, iw)) * (I.times[k + 1] - I.times[k]);
        out[iw] = acc;
    }
    return out;
}

std::size_t identity_safe_stride(const TimeGrid& grid, double omega_max) {
    const double dt_osc = 2.0 * std::numbers::pi / (16.0 * std::max(omega_max, 1e-9));
    const double dt_target = std::min(0.025, dt_osc);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(dt_target / grid.dt)));
}

std::vector<double> stationary_spectrum_numeric(const G1Matrix& g1,
                                                const std::vector<double>& omegas,
                                                int n_threads) {
    auto S = time_dependent_spectrum(g1, omegas, g1.n_rows(), n_threads);
    const std::size_t last = S.n_times() - 1;
    std::vector<double> out(omegas.size());
    for (std::size_t iw = 0; iw < omegas.size(); ++iw) out[iw] = S.at(last, iw);
    return out;
}

}  // namespace waveqed::spectra
